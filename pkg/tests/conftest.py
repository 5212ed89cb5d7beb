"""Shared test configuration.

The property-based tests run on slow single-CPU boxes; the hypothesis
deadline is disabled so numerical work is never misflagged as flaky.
"""

import numpy as np
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numerics",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numerics")


def random_modes(cutoff: int, seed: int) -> np.ndarray:
    """Deterministic standard-complex-Gaussian coefficients for tests."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(cutoff) + 1j * rng.standard_normal(cutoff)
