"""Shared fixtures and hypothesis configuration.

Property tests run derandomized so the whole suite is reproducible;
batteries that want bulk randomness draw from seeded numpy generators
instead of hypothesis.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jetspace import JetField, MetricCtx, Modulus, Poly, Space

settings.register_profile(
    "jetspace",
    derandomize=True,
    max_examples=80,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("jetspace")


@pytest.fixture
def ctx11() -> MetricCtx:
    """k = 1, n = 1 with the Lipschitz modulus: the hand-checkable context."""
    return MetricCtx(Space(1, 1), Modulus.power(1.0))


@pytest.fixture
def hand_field(ctx11) -> JetField:
    """S = {0, 1} with P_0 = 0 and P_1(t) = t - 1.

    Hand evaluation of the compatibility condition: the differences
    (P_0 - P_1)(0) = 1 and D(P_0 - P_1) = -1 against the pair bound
    1^(1-|a|) * 1 give ratios {1, 0, 1}, so lambda_star = 1; the only
    nonzero derivative at a base point is D P_1 = 1, so sup part = 1.
    """
    space = ctx11.space
    return JetField(
        ctx11,
        np.array([[0.0], [1.0]]),
        (Poly.from_coeffs(space, [0.0, 0.0]), Poly.from_coeffs(space, [-1.0, 1.0])),
    )
