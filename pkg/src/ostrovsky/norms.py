"""Sobolev and dyadic-block Besov norms of truncated spectra.

The dyadic decomposition groups frequencies into blocks
``{n : 2^j <= |n| < 2^(j+1)}`` for j >= 0 (the standard Littlewood-Paley
convention; any other cover changes constants only).  On each block the
weighted coefficients ``<n>^s f̂(n)`` are reduced in ℓ^p over both signs
of the frequency; a Hermitian spectrum has |f̂(-n)| = |f̂(n)|, so each
stored mode enters its block sum twice.  The Besov-type norms are the
sup (index ∞) or the plain sum (index 1) over blocks.

The Japanese bracket is the exact ``<n> = (1 + n²)^(1/2)`` throughout.
The default parameters (s, p) = (-0.49, 2.05) satisfy s·p < -1, the
regime where these norms are finite almost surely under the white-noise
measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralState

__all__ = [
    "DEFAULT_S",
    "DEFAULT_P",
    "DyadicProfile",
    "sobolev_norm",
    "dyadic_profile",
    "besov_sup",
    "besov_l1",
    "block_count",
    "block_norms_bulk",
]

DEFAULT_S = -0.49
DEFAULT_P = 2.05


def _raw_modes(spectrum) -> np.ndarray:
    """Accept a SpectralState or a raw coefficient array (modes 1..N)."""
    if isinstance(spectrum, SpectralState):
        return spectrum.modes
    modes = np.asarray(spectrum, dtype=np.complex128)
    if modes.ndim != 1:
        raise ValueError("spectrum must be one-dimensional")
    return modes


@dataclass(frozen=True)
class DyadicProfile:
    """Per-block ℓ^p norms of a weighted spectrum.

    ``block_norms[j]`` is ``(Σ_{2^j <= |n| < 2^{j+1}} <n>^{sp} |f̂(n)|^p)^{1/p}``
    over both signs of n.  The sup over blocks is the b̂^s_{p,∞} norm and
    the sum is the b̂^s_{p,1} norm.
    """

    s: float
    p: float
    block_norms: tuple = field(default_factory=tuple)

    @property
    def sup(self) -> float:
        return max(self.block_norms, default=0.0)

    @property
    def l1(self) -> float:
        return float(sum(self.block_norms))


def block_count(cutoff: int) -> int:
    """Number of dyadic blocks meeting {1..N}: j = 0 .. floor(log2 N)."""
    return int(np.floor(np.log2(cutoff))) + 1 if cutoff >= 1 else 0


def sobolev_norm(state, s: float) -> float:
    """H^s norm: (2π)^{1/2} (Σ_{0<|n|<=N} <n>^{2s} |a_n|²)^{1/2}."""
    modes = _raw_modes(state)
    n = np.arange(1, modes.size + 1, dtype=np.float64)
    weights = (1.0 + n**2) ** s
    total = 2.0 * np.sum(weights * np.abs(modes) ** 2)  # both signs of n
    return float(np.sqrt(2.0 * np.pi * total))


def dyadic_profile(spectrum, s: float = DEFAULT_S, p: float = DEFAULT_P) -> DyadicProfile:
    """Materialize the per-block norm sequence of a spectrum."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    modes = _raw_modes(spectrum)
    cutoff = modes.size
    n = np.arange(1, cutoff + 1, dtype=np.float64)
    weighted = (1.0 + n**2) ** (s * p / 2.0) * np.abs(modes) ** p
    blocks = []
    j = 0
    while (1 << j) <= cutoff:
        lo = 1 << j
        hi = min((1 << (j + 1)) - 1, cutoff)
        block_sum = 2.0 * np.sum(weighted[lo - 1 : hi])  # both signs of n
        blocks.append(float(block_sum ** (1.0 / p)))
        j += 1
    return DyadicProfile(s=s, p=p, block_norms=tuple(blocks))


def besov_sup(spectrum, s: float = DEFAULT_S, p: float = DEFAULT_P) -> float:
    """b̂^s_{p,∞} norm: sup over dyadic blocks of the block ℓ^p norm."""
    return dyadic_profile(spectrum, s, p).sup


def besov_l1(spectrum, s: float = DEFAULT_S, p: float = DEFAULT_P) -> float:
    """b̂^s_{p,1} norm: sum over dyadic blocks of the block ℓ^p norm."""
    return dyadic_profile(spectrum, s, p).l1


def block_norms_bulk(modes_matrix: np.ndarray, s: float, p: float) -> np.ndarray:
    """Block norms for many spectra at once.

    Parameters
    ----------
    modes_matrix : complex array, shape (M, N)
        One spectrum per row (modes 1..N).
    s, p : float
        Norm parameters.

    Returns
    -------
    float array, shape (M, number of blocks)
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    cutoff = modes_matrix.shape[1]
    n = np.arange(1, cutoff + 1, dtype=np.float64)
    weighted = (1.0 + n**2) ** (s * p / 2.0) * np.abs(modes_matrix) ** p
    cols = []
    j = 0
    while (1 << j) <= cutoff:
        lo = 1 << j
        hi = min((1 << (j + 1)) - 1, cutoff)
        cols.append((2.0 * np.sum(weighted[:, lo - 1 : hi], axis=1)) ** (1.0 / p))
        j += 1
    return np.stack(cols, axis=1)
