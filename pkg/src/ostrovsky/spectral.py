"""Spectral representation of real mean-zero periodic fields.

A field u on [0, 2π) is represented by its Fourier coefficients
``a_n`` under the convention ``u(x) = Σ_{0 < |n| <= N} a_n e^{inx}`` with
``a_hat(n) = (1/2π) ∫ u e^{-inx} dx``.  Only the modes n = 1..N are
stored: reality of u fixes ``a_{-n} = conj(a_n)``, and the mean-zero
condition pins ``a_0 = 0``.  Storing half the spectrum makes the
Hermitian symmetry unbreakable rather than merely testable.

This module provides the dispersion relation of the linearized dynamics,
grid transforms, projections, the dealiased quadratic nonlinearity with
a direct-summation oracle, and the conserved functionals (L² norm and
the quadratic-cubic energy invariant), plus the classical sign-definite
Hamiltonian functional evaluated for reporting.

All operations are pure; states are immutable values safe to share
across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralState",
    "make_state",
    "zero_state",
    "dispersion",
    "dispersion_table",
    "to_physical",
    "from_physical",
    "nonlinear_term",
    "convolution_direct",
    "project",
    "l2_norm",
    "hamiltonian",
    "conserved_energy",
    "cubic_integral",
    "square_spectrum",
    "save_spectrum",
    "load_spectrum",
    "SPECTRUM_HEADER_PREFIX",
]

SPECTRUM_HEADER_PREFIX = "ostrovsky-spectrum v1"


@dataclass(frozen=True)
class SpectralState:
    """Immutable truncated spectrum of a real mean-zero periodic field.

    Attributes
    ----------
    modes : ndarray of complex128, shape (N,)
        Coefficients ``a_n`` for n = 1..N.  The negative modes
        ``a_{-n} = conj(a_n)`` are implicit and mode 0 is identically
        zero (not stored).  The array is read-only.
    """

    modes: np.ndarray = field()

    def __post_init__(self):
        modes = np.ascontiguousarray(self.modes, dtype=np.complex128)
        if modes.ndim != 1:
            raise ValueError("modes must be a 1-D array")
        if not np.all(np.isfinite(modes.view(np.float64))):
            raise ValueError("non-finite amplitude in spectral state")
        modes = modes.copy()
        modes.flags.writeable = False
        object.__setattr__(self, "modes", modes)

    @property
    def cutoff(self) -> int:
        """Largest represented frequency N."""
        return self.modes.size


def make_state(modes) -> SpectralState:
    """Build a state from the coefficients ``a_1 .. a_N``."""
    return SpectralState(np.asarray(modes, dtype=np.complex128))


def zero_state(cutoff: int) -> SpectralState:
    """The zero field at truncation level ``cutoff``."""
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    return SpectralState(np.zeros(cutoff, dtype=np.complex128))


def dispersion(n):
    """Dispersion relation m(n) = n³ - 1/n of the linearized flow.

    Each mode of the free evolution rotates as ``a_n(t) =
    e^{-i m(n) t} a_n(0)``.  m is odd, vanishes exactly at |n| = 1, and
    is strictly increasing for n >= 1.

    Parameters
    ----------
    n : nonzero integer or integer array

    Raises
    ------
    ValueError
        If any entry is zero (the antiderivative symbol 1/n is
        undefined there).
    """
    n_arr = np.asarray(n)
    if np.any(n_arr == 0):
        raise ValueError("dispersion undefined at n = 0")
    value = n_arr.astype(np.float64) ** 3 - 1.0 / n_arr
    return value if n_arr.ndim else float(value)


def dispersion_table(cutoff: int) -> np.ndarray:
    """m(n) for the stored modes n = 1..N as a float array."""
    return dispersion(np.arange(1, cutoff + 1))


def _padded_length(cutoff: int) -> int:
    """Transform length making the quadratic convolution alias-free.

    Any length >= 2(2N+1) works; the next power of two keeps the FFT
    cheap.
    """
    return 1 << (4 * cutoff + 1).bit_length()


def _full_spectrum(modes: np.ndarray, length: int) -> np.ndarray:
    """Lay out stored modes on an FFT grid of the given length."""
    cutoff = modes.size
    spec = np.zeros(length, dtype=np.complex128)
    spec[1 : cutoff + 1] = modes
    spec[length - cutoff :] = np.conj(modes[::-1])
    return spec


def to_physical(state: SpectralState, gridpoints: int) -> np.ndarray:
    """Sample the field on the uniform grid x_j = 2πj/M.

    Parameters
    ----------
    state : SpectralState
    gridpoints : int
        Number of samples M; must be at least 2N + 2 so every stored
        mode is representable without aliasing.

    Returns
    -------
    ndarray of float64, shape (M,)
    """
    cutoff = state.cutoff
    if gridpoints < 2 * cutoff + 2:
        raise ValueError(
            f"{gridpoints} gridpoints alias a cutoff-{cutoff} spectrum; "
            f"need at least {2 * cutoff + 2}"
        )
    spec = _full_spectrum(state.modes, gridpoints)
    samples = np.fft.ifft(spec) * gridpoints
    return np.real(samples)


def from_physical(samples, cutoff: int) -> SpectralState:
    """Project grid samples of a real field onto the stored modes.

    The mean (mode 0) is discarded; modes above the cutoff are
    truncated.
    """
    samples = np.asarray(samples, dtype=np.float64)
    gridpoints = samples.size
    if gridpoints < 2 * cutoff + 2:
        raise ValueError("grid too coarse for requested cutoff")
    spec = np.fft.fft(samples) / gridpoints
    return make_state(spec[1 : cutoff + 1])


def square_spectrum(modes: np.ndarray) -> np.ndarray:
    """Exact coefficients of u² for modes 0..N.

    Entry k is ``Σ_{k1+k2=k, 0<|ki|<=N} a_{k1} a_{k2}`` computed by a
    zero-padded transform long enough (>= 2(2N+1)) that the quadratic
    convolution is alias-free, i.e. identical to the direct double sum.
    """
    cutoff = modes.size
    length = _padded_length(cutoff)
    spec = _full_spectrum(modes, length)
    u = np.fft.ifft(spec) * length
    sq = np.fft.fft(u * u) / length
    return sq[: cutoff + 1]


def _nonlinear_modes(modes: np.ndarray) -> np.ndarray:
    """Raw coefficients of -P_N(u u_x) for the stored modes."""
    cutoff = modes.size
    wavenumbers = np.arange(1, cutoff + 1)
    return -0.5j * wavenumbers * square_spectrum(modes)[1:]


def nonlinear_term(state: SpectralState) -> SpectralState:
    """Truncated advective nonlinearity -P_N(u u_x).

    Mode n of ``u u_x`` is ``(i n / 2) Σ_{k1+k2=n} a_{k1} a_{k2}``; the
    result is truncated to |n| <= N, and mode 0 — analytically zero
    because the field is mean-zero — is structurally absent from the
    representation.
    """
    return SpectralState(_nonlinear_modes(state.modes))


_DIRECT_CUTOFF_BOUND = 64


def convolution_direct(state: SpectralState) -> SpectralState:
    """Oracle for :func:`nonlinear_term` by explicit double summation.

    Refuses cutoffs above 64: the O(N²) Python loop exists to
    cross-check the transform path on small systems, not to be fast.
    """
    cutoff = state.cutoff
    if cutoff > _DIRECT_CUTOFF_BOUND:
        raise ValueError(
            f"direct convolution limited to cutoff <= {_DIRECT_CUTOFF_BOUND}"
        )
    modes = state.modes
    out = np.zeros(cutoff, dtype=np.complex128)
    for n in range(1, cutoff + 1):
        acc = 0.0 + 0.0j
        for k1 in range(-cutoff, cutoff + 1):
            k2 = n - k1
            if k1 == 0 or k2 == 0 or abs(k2) > cutoff:
                continue
            c1 = modes[k1 - 1] if k1 > 0 else np.conj(modes[-k1 - 1])
            c2 = modes[k2 - 1] if k2 > 0 else np.conj(modes[-k2 - 1])
            acc += c1 * c2
        out[n - 1] = -0.5j * n * acc
    return SpectralState(out)


def project(state: SpectralState, cutoff: int) -> SpectralState:
    """Zero the modes with |n| > cutoff (idempotent projection)."""
    if cutoff < 1:
        raise ValueError("projection cutoff must be >= 1")
    if cutoff >= state.cutoff:
        return state
    modes = state.modes.copy()
    modes[cutoff:] = 0.0
    return SpectralState(modes)


def l2_norm(state: SpectralState) -> float:
    """L² norm of the field: sqrt(4π Σ_{n>=1} |a_n|²)."""
    return float(np.sqrt(4.0 * np.pi * np.sum(np.abs(state.modes) ** 2)))


def cubic_integral(state: SpectralState) -> float:
    """∫ u³ dx over the period, evaluated without aliasing error.

    Expands the integral as 2π Σ_k (u²)^(k) · a_{-k}; the quadratic
    coefficients come from the exact dealiased convolution, so the
    value matches quadrature on any grid of at least 3N + 1 points.
    """
    modes = state.modes
    sq = square_spectrum(modes)
    return float(4.0 * np.pi * np.real(np.sum(sq[1:] * np.conj(modes))))


def hamiltonian(state: SpectralState) -> float:
    """Sign-definite energy functional ½∫u_x² + ½∫(∂⁻¹u)² - (1/6)∫u³.

    In spectral form: 2π Σ n²|a_n|² + 2π Σ |a_n|²/n² - (1/6)∫u³ with
    the cubic term alias-free.  This is the classical energy expression
    for the variant of the equation whose two linear terms carry the
    same sign; under this package's dispersion convention
    (m(n) = n³ - 1/n, i.e. opposite signs) it is *not* a constant of
    the motion — see :func:`conserved_energy` for the functional the
    flow actually preserves.  It is exposed for reporting and
    cross-convention comparison.
    """
    mods_sq = np.abs(state.modes) ** 2
    wavenumbers = np.arange(1, state.cutoff + 1, dtype=np.float64)
    quadratic = 2.0 * np.pi * np.sum(
        (wavenumbers**2 + wavenumbers**-2) * mods_sq
    )
    return float(quadratic - cubic_integral(state) / 6.0)


def conserved_energy(state: SpectralState) -> float:
    """The energy invariant of the flow: ½∫u_x² - ½∫(∂⁻¹u)² + (1/6)∫u³.

    For ``u_t = u_xxx - ∂⁻¹u - u u_x`` (the dispersion convention
    m(n) = n³ - 1/n) the conserved quadratic-cubic functional pairs the
    two linear terms with *opposite* signs, mirroring the signs with
    which they enter the equation: in spectral form
    2π Σ (n² - 1/n²)|a_n|² + (1/6)∫u³.  Its time derivative along the
    truncated flow vanishes identically; the integrator enforces it to
    rounding precision.
    """
    mods_sq = np.abs(state.modes) ** 2
    wavenumbers = np.arange(1, state.cutoff + 1, dtype=np.float64)
    quadratic = 2.0 * np.pi * np.sum(
        (wavenumbers**2 - wavenumbers**-2) * mods_sq
    )
    return float(quadratic + cubic_integral(state) / 6.0)


def save_spectrum(state: SpectralState, path) -> None:
    """Write a spectrum snapshot file.

    Format: a header line ``ostrovsky-spectrum v1 N=<N>`` followed by
    one CSV row ``n,re,im`` per stored mode, n ascending from 1, floats
    at 17 significant digits (lossless for float64).
    """
    buf = io.StringIO()
    buf.write(f"{SPECTRUM_HEADER_PREFIX} N={state.cutoff}\n")
    for n, a in enumerate(state.modes, start=1):
        buf.write(f"{n},{a.real:.17g},{a.imag:.17g}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(buf.getvalue())


def load_spectrum(path) -> SpectralState:
    """Read a spectrum snapshot file written by :func:`save_spectrum`."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or not lines[0].startswith(SPECTRUM_HEADER_PREFIX):
        raise ValueError(f"{path}: not a spectrum file (bad header)")
    try:
        cutoff = int(lines[0].split("N=")[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from exc
    modes = np.zeros(cutoff, dtype=np.complex128)
    seen = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'n,re,im'")
        try:
            n = int(parts[0])
            re, im = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: unparsable row") from exc
        if not 1 <= n <= cutoff:
            raise ValueError(f"{path}:{lineno}: mode {n} outside 1..{cutoff}")
        modes[n - 1] = complex(re, im)
        seen += 1
    if seen != cutoff:
        raise ValueError(f"{path}: expected {cutoff} rows, found {seen}")
    return make_state(modes)
