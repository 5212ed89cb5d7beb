"""Pseudospectral simulation and statistical verification for a
third-order dispersive wave equation on the circle.

The package evolves Galerkin truncations of
``u_t - u_xxx + D⁻¹u + u u_x = 0`` (mean-zero periodic data, D⁻¹ the
zero-mean antiderivative), samples the associated white-noise ensemble,
and certifies the norm and multiplier inequalities that underpin its
statistical theory.  Subpackages:

``spectral``
    Immutable truncated spectra, transforms, nonlinearity, invariants.
``integrate``
    Integrating-factor RK4 with invariant projection; compiled kernel
    with a pure-python fallback.
``measure``
    White-noise sampling and the invariance / tail / growth test
    suites.
``norms``
    Sobolev and dyadic-block norms.
``estimates``
    Exhaustive scans certifying resonance and multiplier bounds.
``cli``
    The ``ostrovsky`` command-line entry point.
"""

try:
    from importlib.metadata import version as _dist_version

    __version__ = _dist_version("ostrovsky")
except Exception:  # pragma: no cover - not installed as a distribution
    __version__ = "unknown"

from . import estimates, integrate, measure, norms, spectral
from .integrate import (
    BlowUpError,
    SimConfig,
    Trajectory,
    active_backend,
    evolve,
    evolve_to_times,
    linear_flow,
    step,
)
from .measure import (
    invariance_test,
    growth_test,
    sample_white_noise,
    tail_test,
)
from .norms import besov_l1, besov_sup, dyadic_profile, sobolev_norm
from .spectral import (
    SpectralState,
    conserved_energy,
    dispersion,
    from_physical,
    hamiltonian,
    l2_norm,
    load_spectrum,
    make_state,
    nonlinear_term,
    save_spectrum,
    to_physical,
    zero_state,
)

__all__ = [
    "__version__",
    "BlowUpError",
    "SimConfig",
    "SpectralState",
    "Trajectory",
    "active_backend",
    "besov_l1",
    "besov_sup",
    "conserved_energy",
    "dispersion",
    "dyadic_profile",
    "estimates",
    "evolve",
    "evolve_to_times",
    "from_physical",
    "growth_test",
    "hamiltonian",
    "invariance_test",
    "integrate",
    "l2_norm",
    "linear_flow",
    "load_spectrum",
    "make_state",
    "measure",
    "nonlinear_term",
    "norms",
    "sample_white_noise",
    "save_spectrum",
    "sobolev_norm",
    "spectral",
    "step",
    "tail_test",
    "to_physical",
    "zero_state",
]
