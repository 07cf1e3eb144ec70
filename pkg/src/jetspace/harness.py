"""Seeded instance generation and desk-scale finiteness experiments.

The experiments probe one phenomenon: if every restriction of an instance
to at most N = 2**min(ell + 1, dim P_k) points admits a selection at
scale K, the full instance should admit one at gamma * K for a constant
gamma independent of the point count.  Instances are generated around a
hidden feasible field, so every coefficient set is nonempty by
construction and, when K is calibrated to the hidden field's scale, the
subset hypothesis holds by construction as well; gamma is then measured
exactly by the scale-minimizing LP rather than searched.

A trial whose subsets all pass at K but whose global minimum scale lands
above ``GAMMA_CEILING * K`` would contradict the finiteness prediction.
Because a floating-point false infeasibility would be an embarrassing
refutation, any such trial is re-decided in exact rational arithmetic
before it is reported as a counterexample.

Trials are independent, seeded by (config seed, trial index), and merged
in trial order, so reports are deterministic for any thread count.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, GenerationError, InvariantError
from .jets import Space
from .lp import FEAS_TOL
from .metric import MetricCtx
from .moduli import Modulus
from .polytopes import ConvexSetSpec
from .selection import (
    Instance,
    constructive_selection,
    min_lambda_selection,
    selection_feasible,
    selection_feasible_exact,
)
from .whitney import JetField, wg_lambda_star

SET_FAMILIES = ("singletons", "boxes", "random_polytopes")

_SEPARATION = 1e-3
_MAX_RESAMPLES = 10_000
_SUBSET_BUDGET = 1_000_000

GAMMA_CEILING = 1e6
_PAIRWISE_TOL = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: geometry, generator family, scale, and trial count.

    ``K`` is the hypothesis scale tested on every small subset.  A
    nonpositive ``K`` calibrates per trial to the hidden field's own
    Whitney-Glaeser scale, which makes the subset hypothesis hold by
    construction and turns gamma into a pure amplification measurement.
    """

    k: int
    n: int
    ell: int
    num_points: int
    trials: int
    seed: int
    modulus: Modulus
    set_family: str
    K: float = 0.0
    facets: int | None = None

    def __post_init__(self):
        Space(self.k, self.n)  # domain validation for k, n
        if self.ell < 0:
            raise DomainError("ell must be >= 0")
        if self.num_points < 2:
            raise DomainError("num_points must be >= 2")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.set_family not in SET_FAMILIES:
            raise DomainError(f"unknown set family {self.set_family!r}; pick one of {SET_FAMILIES}")
        if self.set_family == "random_polytopes":
            if self.facets is None or self.facets < 1:
                raise DomainError("random_polytopes needs facets >= 1")
        elif self.facets is not None:
            raise DomainError(f"facets only applies to random_polytopes, not {self.set_family}")

    @property
    def ctx(self) -> MetricCtx:
        return MetricCtx(Space(self.k, self.n), self.modulus)

    @property
    def n_used(self) -> int:
        return self.ctx.constants.finiteness_number(self.ell)

    def to_json(self) -> dict:
        out = {
            "k": self.k,
            "n": self.n,
            "ell": self.ell,
            "num_points": self.num_points,
            "trials": self.trials,
            "seed": self.seed,
            "modulus": self.modulus.to_json(),
            "set_family": self.set_family,
            "K": self.K,
        }
        if self.facets is not None:
            out["facets"] = self.facets
        return out


@dataclass(frozen=True)
class FinitenessReport:
    """Aggregate of one finiteness sweep plus the per-trial rows."""

    n_used: int
    trials_run: int
    all_subsets_feasible_count: int
    global_feasible_count: int
    gamma_max: float | None
    gamma_distribution: dict
    counterexamples: list
    rows: list

    def to_json(self) -> dict:
        return {
            "N_used": self.n_used,
            "trials_run": self.trials_run,
            "all_subsets_feasible_count": self.all_subsets_feasible_count,
            "global_feasible_count": self.global_feasible_count,
            "gamma_max": self.gamma_max,
            "gamma_distribution": self.gamma_distribution,
            "counterexamples": self.counterexamples,
            "rows": [list(r) for r in self.rows],
        }

    def csv_rows(self) -> list[tuple]:
        """Rows under the header (trial, N_used, subsets_feasible, lambda_global, gamma)."""
        return [tuple(r) for r in self.rows]


CSV_HEADER = ("trial", "N_used", "subsets_feasible", "lambda_global", "gamma")


def _draw_points(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    pts: list[np.ndarray] = []
    resamples = 0
    while len(pts) < m:
        cand = rng.uniform(0.0, 1.0, size=n)
        if all(float(np.linalg.norm(cand - p)) > _SEPARATION for p in pts):
            pts.append(cand)
            continue
        resamples += 1
        if resamples > _MAX_RESAMPLES:
            raise GenerationError(
                f"could not place {m} points at separation {_SEPARATION:g} after "
                f"{_MAX_RESAMPLES} resamples; reduce num_points"
            )
    return np.array(pts)


def _build_sets(cfg: ExperimentConfig, rng: np.random.Generator, coeffs: np.ndarray) -> tuple[ConvexSetSpec, ...]:
    dim = coeffs.shape[1]
    sets = []
    for c in coeffs:
        if cfg.set_family == "singletons":
            sets.append(ConvexSetSpec.singleton(c))
            continue
        radius = float(rng.uniform(0.1, 0.6))
        center = c + rng.uniform(-0.5, 0.5, size=dim) * radius
        box = ConvexSetSpec.box(center, radius)
        if cfg.set_family == "boxes":
            sets.append(box)
            continue
        rows = []
        rhs = []
        for _ in range(cfg.facets):
            a = rng.normal(size=dim)
            margin = float(rng.uniform(0.05, 0.3))
            rows.append(a)
            rhs.append(float(a @ c) + margin * float(np.linalg.norm(a)))
        cut = ConvexSetSpec(a_ub=np.array(rows), b_ub=np.array(rhs))
        sets.append(box.intersect(cut))
    return tuple(sets)


def _generate(cfg: ExperimentConfig, trial: int) -> tuple[Instance, JetField]:
    if trial < 0 or trial >= cfg.trials:
        raise DomainError(f"trial must lie in [0, {cfg.trials}), got {trial}")
    rng = np.random.default_rng((cfg.seed, trial))
    ctx = cfg.ctx
    points = _draw_points(rng, cfg.num_points, cfg.n)
    coeffs = rng.uniform(-1.0, 1.0, size=(cfg.num_points, ctx.space.dim))
    instance = Instance(ctx, points, _build_sets(cfg, rng, coeffs))
    return instance, instance.field_from(coeffs)


def generate_instance(cfg: ExperimentConfig, trial: int) -> Instance:
    """Deterministic instance for (config seed, trial): unit-cube points at
    pairwise separation > 1e-3, sets built around a hidden feasible field."""
    return _generate(cfg, trial)[0]


def generate_hidden_field(cfg: ExperimentConfig, trial: int) -> JetField:
    """The feasible field the generator hid inside the instance's sets."""
    return _generate(cfg, trial)[1]


def _trial_scale(cfg: ExperimentConfig, hidden: JetField) -> float:
    if cfg.K > 0.0:
        return float(cfg.K)
    return wg_lambda_star(hidden)


def _map_trials(cfg: ExperimentConfig, fn: Callable[[int], tuple], threads: int | None) -> list[tuple]:
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    if workers <= 1 or cfg.trials == 1:
        return [fn(t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(cfg.trials)))


def finiteness_experiment(cfg: ExperimentConfig, threads: int | None = None) -> FinitenessReport:
    """Test the subset-to-global amplification over seeded trials.

    Per trial: every subset of at most N_used points is tested for
    feasibility at the trial scale K; if all pass, the global minimum
    scale is solved exactly and gamma = lambda_global / K recorded.  A
    gamma above GAMMA_CEILING survives only if exact rational arithmetic
    confirms the global infeasibility at the ceiling.
    """
    n_used = cfg.n_used
    if cfg.num_points < n_used:
        raise DomainError(
            f"finiteness experiment needs num_points >= N_used = {n_used}, got {cfg.num_points}"
        )
    if math.comb(cfg.num_points, n_used) > _SUBSET_BUDGET:
        raise DomainError(
            f"C({cfg.num_points}, {n_used}) = {math.comb(cfg.num_points, n_used)} subsets "
            f"exceeds the {_SUBSET_BUDGET} budget; reduce num_points or ell"
        )

    def run_trial(trial: int) -> tuple:
        instance, hidden = _generate(cfg, trial)
        scale = _trial_scale(cfg, hidden)
        all_feasible = True
        for size in range(1, n_used + 1):
            for idxs in itertools.combinations(range(cfg.num_points), size):
                if selection_feasible(instance.restricted(idxs), scale) is None:
                    all_feasible = False
                    break
            if not all_feasible:
                break
        if not all_feasible:
            return (trial, n_used, False, None, None, None)
        lam_global, _ = min_lambda_selection(instance)
        if scale > 0.0:
            gamma = lam_global / scale
        else:
            gamma = 1.0 if lam_global <= FEAS_TOL else math.inf
        counterexample = None
        if gamma > GAMMA_CEILING:
            # the finding survives only when the exact pass agrees
            if not selection_feasible_exact(instance, GAMMA_CEILING * scale):
                counterexample = {
                    "trial": trial,
                    "K": scale,
                    "lambda_global": lam_global,
                    "gamma": gamma if math.isfinite(gamma) else None,
                    "instance": instance.to_json(),
                }
            else:
                gamma = GAMMA_CEILING
        return (trial, n_used, True, lam_global, gamma if math.isfinite(gamma) else None, counterexample)

    results = _map_trials(cfg, run_trial, threads)
    rows = [(t, n, feas, lam, gam) for (t, n, feas, lam, gam, _) in results]
    gammas = [gam for (_, _, _, _, gam, _) in results if gam is not None and math.isfinite(gam)]
    counterexamples = [ce for (*_, ce) in results if ce is not None]
    quantiles = {}
    if gammas:
        arr = np.array(gammas)
        quantiles = {
            "min": float(arr.min()),
            "q25": float(np.quantile(arr, 0.25)),
            "median": float(np.quantile(arr, 0.5)),
            "q75": float(np.quantile(arr, 0.75)),
            "max": float(arr.max()),
        }
    return FinitenessReport(
        n_used=n_used,
        trials_run=cfg.trials,
        all_subsets_feasible_count=sum(1 for (_, _, feas, _, _, _) in results if feas),
        global_feasible_count=len(gammas),
        gamma_max=max(gammas) if gammas else None,
        gamma_distribution=quantiles,
        counterexamples=counterexamples,
        rows=rows,
    )


def two_point_finiteness_check(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """For singleton families the pairwise scale determines the global one
    exactly; verify that trial by trial via independent LP solves."""
    if cfg.set_family != "singletons":
        raise DomainError("the two-point check applies to the singletons family only")

    def run_trial(trial: int) -> tuple:
        instance, _ = _generate(cfg, trial)
        pair_max = 0.0
        for i, j in itertools.combinations(range(cfg.num_points), 2):
            lam_ij, _ = min_lambda_selection(instance.restricted((i, j)))
            pair_max = max(pair_max, lam_ij)
        lam_global, _ = min_lambda_selection(instance)
        gap = abs(pair_max - lam_global)
        return (trial, pair_max, lam_global, gap)

    results = _map_trials(cfg, run_trial, threads)
    scale = max(1.0, max((r[2] for r in results), default=1.0))
    violations = [r for r in results if r[3] > _PAIRWISE_TOL * max(1.0, r[2])]
    return {
        "trials_run": cfg.trials,
        "violations": len(violations),
        "max_gap": max((r[3] for r in results), default=0.0),
        "max_gap_relative": max((r[3] / max(1.0, r[2]) for r in results), default=0.0),
        "tolerance": _PAIRWISE_TOL,
        "scale": scale,
    }


def constructive_vs_optimal(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """Run the constructive route at the optimal scale and record how far
    above the LP optimum it lands, against its a-posteriori ceiling."""
    if cfg.num_points > 12:
        raise DomainError("constructive comparison is desk scale: num_points <= 12")
    e_n = cfg.ctx.constants.e_n
    tau = cfg.ctx.constants.tau

    def run_trial(trial: int) -> tuple:
        instance, _ = _generate(cfg, trial)
        lam_opt, _ = min_lambda_selection(instance)
        hypothesis = lam_opt if lam_opt > 0.0 else 1.0
        out = constructive_selection(instance, hypothesis)
        ratio = out.lambda_used / hypothesis
        eta = out.certificate["eta_observed"]
        bound = tau(max(1.0, cfg.num_points * eta)) * e_n
        if ratio > bound * (1.0 + 1e-9):
            raise InvariantError(
                f"trial {trial}: constructive ratio {ratio} exceeds the "
                f"a-posteriori bound {bound}"
            )
        return (trial, ratio, bound, eta)

    results = _map_trials(cfg, run_trial, threads)
    ratios = np.array([r[1] for r in results])
    return {
        "trials_run": cfg.trials,
        "ratio_max": float(ratios.max()),
        "ratio_median": float(np.quantile(ratios, 0.5)),
        "bound_min": min(r[2] for r in results),
        "all_within_bound": True,
        "rows": [list(r) for r in results],
    }
