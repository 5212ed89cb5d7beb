"""White-noise measure on truncated spectra and its statistical suites.

The measure puts i.i.d. standard complex Gaussians on the stored modes:
``a_n = g_n`` with density (1/2π)e^{-|z|²/2} per mode — real and
imaginary parts independent, mean 0, variance 1, so E|a_n|² = 2.  Its
(unnormalized) log-density is -½ Σ|a_n|², a function of the conserved
L² norm alone; combined with the divergence-free vector field this is
why the measure is invariant under the truncated flow.

Three ensemble suites operationalize the theory as statistics:

* ``invariance_test`` — evolve a sample, compare against fresh draws
  (per-mode second moments, two-sample KS per component, and a KS test
  of the squared-norm statistic against its exact chi-square law).
* ``tail_test`` — Gaussian-tail fit: log-exceedance of the dyadic Besov
  norm against K² should be linear with negative slope.
* ``growth_test`` — quantiles of the running sup of the norm along
  trajectories should grow at most linearly in log(T/ε) after squaring.

Member seeds are derived from the ensemble seed by a splitmix64 mix, so
ensembles are reproducible member-by-member under any parallel
schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .integrate import BlowUpError, cfl_bound, evolve_to_times, iter_segments
from .norms import DEFAULT_P, DEFAULT_S, block_norms_bulk, besov_sup
from .spectral import SpectralState, make_state

__all__ = [
    "member_seed",
    "sample_white_noise",
    "sample_matrix",
    "log_density",
    "Ensemble",
    "sample_ensemble",
    "InvarianceReport",
    "invariance_test",
    "TailReport",
    "tail_test",
    "GrowthReport",
    "growth_test",
]

_MASK64 = (1 << 64) - 1


def member_seed(seed: int, index: int) -> int:
    """Derive the 64-bit seed of ensemble member ``index``.

    splitmix64 finalizer applied to (seed + golden-ratio-increment ×
    (index+1)); published constants, collision-free as a function of
    index for fixed seed.
    """
    z = (int(seed) + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def sample_white_noise(cutoff: int, seed: int) -> SpectralState:
    """One draw of the white-noise measure at truncation level N.

    Each stored mode is an independent standard complex Gaussian
    (components N(0,1), E|a_n|² = 2); the Hermitian extension to
    negative modes is implicit in the representation.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(cutoff) + 1j * rng.standard_normal(cutoff)
    return make_state(z)


def sample_matrix(cutoff: int, count: int, seed: int) -> np.ndarray:
    """Stack of ``count`` independent draws, one per row.

    Row i uses ``member_seed(seed, i)``, so it equals
    ``sample_white_noise(cutoff, member_seed(seed, i))`` exactly.
    """
    out = np.empty((count, cutoff), dtype=np.complex128)
    for i in range(count):
        rng = np.random.default_rng(member_seed(seed, i))
        out[i] = rng.standard_normal(cutoff) + 1j * rng.standard_normal(cutoff)
    return out


def log_density(state: SpectralState) -> float:
    """Unnormalized log-density -½ Σ_{n=1}^N |a_n|² of the measure."""
    return float(-0.5 * np.sum(np.abs(state.modes) ** 2))


@dataclass(frozen=True)
class Ensemble:
    """A seeded collection of states with bookkeeping for failures."""

    cutoff: int
    seed: int
    member_seeds: tuple
    members: tuple
    failures: tuple = ()

    def __post_init__(self):
        if any(m.cutoff != self.cutoff for m in self.members):
            raise ValueError("ensemble members must share the cutoff")
        if len(set(self.member_seeds)) != len(self.member_seeds):
            raise ValueError("member seeds must be pairwise distinct")


def sample_ensemble(cutoff: int, count: int, seed: int) -> Ensemble:
    """Draw an ensemble of independent white-noise members."""
    seeds = tuple(member_seed(seed, i) for i in range(count))
    members = tuple(sample_white_noise(cutoff, s) for s in seeds)
    return Ensemble(cutoff=cutoff, seed=seed, member_seeds=seeds, members=members)


# ---------------------------------------------------------------------------
# invariance suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of the distributional-invariance suite.

    ``rows`` holds one record per (observable, mode, time):
    (observable, mode, time, value, stat_error, p_value, passed).
    Mode -1 marks whole-spectrum observables.
    """

    sample_size: int
    sample_used: int
    times: tuple
    alpha: float
    rows: tuple
    failures: tuple
    inconclusive: bool

    @property
    def passed(self) -> bool:
        return (not self.inconclusive) and all(r[6] for r in self.rows)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("observable,mode,time,value,stat_error,p_value,passed\n")
            for obs, mode, t, value, se, pval, ok in self.rows:
                handle.write(
                    f"{obs},{mode},{t:.17g},{value:.17g},{se:.17g},"
                    f"{pval:.17g},{int(ok)}\n"
                )

    def summary(self) -> str:
        verdict = (
            "INCONCLUSIVE"
            if self.inconclusive
            else ("PASS" if self.passed else "FAIL")
        )
        n_fail = sum(1 for r in self.rows if not r[6])
        lines = [
            f"invariance suite: {verdict}",
            f"  members: {self.sample_used}/{self.sample_size} "
            f"(blow-ups excluded: {len(self.failures)})",
            f"  times: {', '.join(f'{t:g}' for t in self.times)}",
            f"  tests: {len(self.rows)} total, {n_fail} failing "
            f"(family level {self.alpha:g}, Bonferroni-corrected)",
        ]
        return "\n".join(lines)


def _evolve_member(args):
    """Worker: evolve one sampled member to the requested times."""
    cutoff, seed_i, times, dt_divisor, linear_only = args
    state = sample_white_noise(cutoff, seed_i)
    if not times:
        return []
    if linear_only:
        snaps = evolve_to_times(state, times, dt=1.0, include_nonlinear=False)
        return [s.modes for s in snaps]
    dt = cfl_bound(state) / dt_divisor
    try:
        snaps = evolve_to_times(state, times, dt)
    except BlowUpError:
        return None
    return [s.modes for s in snaps]


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def invariance_test(
    cutoff: int,
    sample_size: int,
    times,
    seed: int,
    *,
    alpha: float = 0.01,
    dt_divisor: float = 8.0,
    linear_only: bool = False,
    ks_modes=None,
    jobs: int = 1,
) -> InvarianceReport:
    """Test distributional equality of the evolved and fresh ensembles.

    Draws ``sample_size`` members, evolves each to every requested time
    (per-member step = stability bound / dt_divisor), and compares with
    fresh draws: (a) per-mode second moments against 2 within 3 MC
    standard errors; (b) two-sample KS on the real and imaginary parts
    of every tested mode; (c) one-sample KS of Σ|a_n|² against its exact
    chi-square(2N) law.  All KS tests are Bonferroni-corrected to the
    family level ``alpha``.  Members whose evolution fails are excluded
    and counted; more than 20% exclusions marks the report inconclusive.
    """
    if sample_size < 100:
        raise ValueError("need at least 100 samples")
    times = sorted(float(t) for t in times)
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    positive_times = [t for t in times if t > 0]

    tasks = [
        (cutoff, member_seed(seed, i), positive_times, dt_divisor, linear_only)
        for i in range(sample_size)
    ]
    results = _parallel_map(_evolve_member, tasks, jobs)
    failures = tuple(i for i, r in enumerate(results) if r is None)
    kept = [i for i, r in enumerate(results) if r is not None]
    used = len(kept)

    # Evolved coefficient matrices per requested time.
    initial = np.empty((used, cutoff), dtype=np.complex128)
    for row, i in enumerate(kept):
        rng = np.random.default_rng(member_seed(seed, i))
        initial[row] = rng.standard_normal(cutoff) + 1j * rng.standard_normal(cutoff)
    evolved = {}
    for row, i in enumerate(kept):
        snaps = results[i]
        for j, t in enumerate(positive_times):
            evolved.setdefault(t, np.empty((used, cutoff), dtype=np.complex128))[
                row
            ] = snaps[j]
    if 0.0 in times:
        evolved[0.0] = initial

    reference = sample_matrix(cutoff, sample_size, member_seed(seed, sample_size))

    tested_modes = list(range(cutoff)) if ks_modes is None else sorted(ks_modes)
    n_ks = 2 * len(tested_modes) * len(times)
    n_chi = len(times)
    ks_level = alpha / max(1, n_ks)
    chi_level = alpha / max(1, n_chi)

    rows = []
    for t in times:
        data = evolved[t]
        # (a) second moments: E|a_n|² = 2, within 3 empirical SEs.
        sq = np.abs(data) ** 2
        means = sq.mean(axis=0)
        errors = sq.std(axis=0, ddof=1) / math.sqrt(used)
        for n_idx in range(cutoff):
            ok = abs(means[n_idx] - 2.0) <= 3.0 * errors[n_idx]
            rows.append(
                ("second_moment", n_idx + 1, t, float(means[n_idx]),
                 float(errors[n_idx]), float("nan"), bool(ok))
            )
        # (b) two-sample KS per mode and component.
        for n_idx in tested_modes:
            for name, extract in (("ks_real", np.real), ("ks_imag", np.imag)):
                result = stats.ks_2samp(
                    extract(data[:, n_idx]), extract(reference[:, n_idx])
                )
                ok = result.pvalue >= ks_level
                rows.append(
                    (name, n_idx + 1, t, float(result.statistic), float("nan"),
                     float(result.pvalue), bool(ok))
                )
        # (c) squared-norm statistic against chi-square(2N).
        total = np.sum(sq, axis=1)
        result = stats.kstest(total, stats.chi2(df=2 * cutoff).cdf)
        ok = result.pvalue >= chi_level
        rows.append(
            ("norm_chisq", -1, t, float(result.statistic), float("nan"),
             float(result.pvalue), bool(ok))
        )

    inconclusive = used < 0.8 * sample_size
    return InvarianceReport(
        sample_size=sample_size,
        sample_used=used,
        times=tuple(times),
        alpha=alpha,
        rows=tuple(rows),
        failures=failures,
        inconclusive=inconclusive,
    )


# ---------------------------------------------------------------------------
# tail suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    """Gaussian-tail fit of the Besov-norm exceedance probabilities."""

    sample_size: int
    s: float
    p: float
    k_values: tuple
    exceedance: tuple
    usable: int
    slope: float           # fitted c in P ≈ exp(intercept - c K²)
    intercept: float
    r_squared: float
    degenerate: bool

    @property
    def passed(self) -> bool:
        return (not self.degenerate) and self.slope > 0

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("K,exceedance\n")
            for k, p_emp in zip(self.k_values, self.exceedance):
                handle.write(f"{k:.17g},{p_emp:.17g}\n")

    def summary(self) -> str:
        verdict = "DEGENERATE" if self.degenerate else (
            "PASS" if self.passed else "FAIL")
        return "\n".join([
            f"tail suite: {verdict}",
            f"  samples: {self.sample_size}, norm parameters "
            f"s={self.s:g}, p={self.p:g}",
            f"  fit: log P = {self.intercept:.4g} - {self.slope:.4g}·K² "
            f"over {self.usable} grid points, R² = {self.r_squared:.4f}",
        ])


def tail_test(
    cutoff: int,
    sample_size: int,
    seed: int,
    *,
    s: float = DEFAULT_S,
    p: float = DEFAULT_P,
    k_grid=None,
    grid_points: int = 25,
) -> TailReport:
    """Fit the exceedance tail of the Besov norm under the measure.

    Samples ``sample_size`` fresh draws, computes their b̂^s_{p,∞}
    norms, and regresses log empirical exceedance on K².  The default
    grid spans the 0.6 empirical quantile down to survival 20/M
    (log-spaced), keeping every point at exceedance >= 10/M so counts
    stay statistically meaningful.
    """
    if sample_size < 10**4:
        raise ValueError("tail fit needs at least 1e4 samples")
    modes = sample_matrix(cutoff, sample_size, seed)
    norms = np.max(block_norms_bulk(modes, s, p), axis=1)

    if k_grid is None:
        survival = np.geomspace(0.4, 20.0 / sample_size, grid_points)
        k_grid = np.quantile(norms, 1.0 - survival)
    k_grid = np.unique(np.asarray(k_grid, dtype=np.float64))

    exceed = np.array([(norms > k).mean() for k in k_grid])
    usable = exceed >= 10.0 / sample_size
    k_use, p_use = k_grid[usable], exceed[usable]
    if k_use.size < 3:
        return TailReport(
            sample_size=sample_size, s=s, p=p,
            k_values=tuple(k_grid), exceedance=tuple(exceed),
            usable=int(k_use.size), slope=float("nan"),
            intercept=float("nan"), r_squared=float("nan"), degenerate=True,
        )
    x = k_use**2
    y = np.log(p_use)
    fit = stats.linregress(x, y)
    return TailReport(
        sample_size=sample_size, s=s, p=p,
        k_values=tuple(float(k) for k in k_grid),
        exceedance=tuple(float(q) for q in exceed),
        usable=int(k_use.size),
        slope=float(-fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        degenerate=False,
    )


# ---------------------------------------------------------------------------
# growth suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    """Quantile growth of the running sup of the norm along the flow."""

    sample_size: int
    sample_used: int
    horizons: tuple
    eps_grid: tuple
    quantiles: tuple        # quantiles[i][j] for (horizon i, eps j)
    slope: float            # pooled OLS slope of quantile² on log(T/eps)
    intercept: float
    r_squared: float
    rmse: float
    monotone: bool
    sublinear: bool
    failures: tuple
    inconclusive: bool

    @property
    def passed(self) -> bool:
        return (not self.inconclusive) and self.slope > 0 and self.sublinear

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("horizon,eps,quantile\n")
            for i, horizon in enumerate(self.horizons):
                for j, eps in enumerate(self.eps_grid):
                    handle.write(
                        f"{horizon:.17g},{eps:.17g},{self.quantiles[i][j]:.17g}\n"
                    )

    def summary(self) -> str:
        verdict = (
            "INCONCLUSIVE" if self.inconclusive
            else ("PASS" if self.passed else "FAIL")
        )
        return "\n".join([
            f"growth suite: {verdict}",
            f"  members: {self.sample_used}/{self.sample_size} "
            f"(blow-ups excluded: {len(self.failures)})",
            f"  fit: quantile² = {self.intercept:.4g} + "
            f"{self.slope:.4g}·log(T/ε), R² = {self.r_squared:.4f}, "
            f"RMSE = {self.rmse:.4g}",
            f"  monotone in log(T/ε): {self.monotone}; "
            f"sublinear in T: {self.sublinear}",
        ])


def _growth_member(args):
    """Worker: running sup of the Besov norm at each horizon."""
    cutoff, seed_i, horizons, s, p, dt_divisor, observe_interval = args
    state = sample_white_noise(cutoff, seed_i)
    dt = cfl_bound(state) / dt_divisor
    chunk = max(1, int(round(observe_interval / dt)))
    sups = []
    running = 0.0
    target = 0
    try:
        for t, modes in iter_segments(state, dt, horizons[-1], chunk):
            running = max(running, besov_sup(modes, s, p))
            while target < len(horizons) and t >= horizons[target] - 1e-12:
                sups.append(running)
                target += 1
    except BlowUpError:
        return None
    while len(sups) < len(horizons):
        sups.append(running)
    return sups


def growth_test(
    cutoff: int,
    sample_size: int,
    horizons,
    seed: int,
    *,
    eps_grid=(0.2, 0.1, 0.05, 0.02),
    s: float = DEFAULT_S,
    p: float = DEFAULT_P,
    dt_divisor: float = 2.0,
    observe_interval: float = 0.01,
    jobs: int = 1,
) -> GrowthReport:
    """Quantiles of sup_{t<=T} of the Besov norm across an ensemble.

    For each horizon T and each ε, reports the (1-ε)-quantile over
    members of the running sup (ε = 1 degenerates to the ensemble
    minimum).  A pooled OLS of quantile² on log(T/ε) yields the growth
    slope; the report checks monotonicity along log(T/ε) and that the
    longest-horizon increment stays within the linear-in-log prediction
    plus three RMSEs of fit noise.
    """
    horizons = sorted(float(t) for t in horizons)
    if not horizons or horizons[0] <= 0:
        raise ValueError("horizons must be positive")
    eps_grid = sorted({float(e) for e in eps_grid}, reverse=True)  # large ε first
    if any(not 0 < e <= 1 for e in eps_grid):
        raise ValueError("eps values must lie in (0, 1]")

    tasks = [
        (cutoff, member_seed(seed, i), horizons, s, p, dt_divisor,
         observe_interval)
        for i in range(sample_size)
    ]
    results = _parallel_map(_growth_member, tasks, jobs)
    failures = tuple(i for i, r in enumerate(results) if r is None)
    sups = np.array([r for r in results if r is not None], dtype=np.float64)
    used = sups.shape[0] if sups.size else 0
    inconclusive = used < 0.8 * sample_size

    quantiles = []
    for i in range(len(horizons)):
        row = []
        for eps in eps_grid:
            row.append(float(np.quantile(sups[:, i], 1.0 - eps)) if used else
                       float("nan"))
        quantiles.append(tuple(row))

    log_ratio, q_sq = [], []
    for i, horizon in enumerate(horizons):
        for j, eps in enumerate(eps_grid):
            log_ratio.append(math.log(horizon / eps))
            q_sq.append(quantiles[i][j] ** 2)
    log_ratio = np.array(log_ratio)
    q_sq = np.array(q_sq)
    fit = stats.linregress(log_ratio, q_sq)
    predicted = fit.intercept + fit.slope * log_ratio
    rmse = float(np.sqrt(np.mean((q_sq - predicted) ** 2)))

    order = np.argsort(log_ratio)
    sorted_q = q_sq[order]
    drops = np.maximum(0.0, -(np.diff(sorted_q)))
    span = max(sorted_q.max() - sorted_q.min(), 1e-30)
    monotone = bool(np.all(drops <= 0.05 * span))

    sublinear = True
    if len(horizons) >= 2:
        t_lo, t_hi = horizons[0], horizons[-1]
        budget = fit.slope * math.log(t_hi / t_lo) + 3.0 * rmse
        i_lo, i_hi = 0, len(horizons) - 1
        for j in range(len(eps_grid)):
            delta = quantiles[i_hi][j] ** 2 - quantiles[i_lo][j] ** 2
            if delta > budget:
                sublinear = False

    return GrowthReport(
        sample_size=sample_size,
        sample_used=used,
        horizons=tuple(horizons),
        eps_grid=tuple(eps_grid),
        quantiles=tuple(quantiles),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        rmse=rmse,
        monotone=monotone,
        sublinear=sublinear,
        failures=failures,
        inconclusive=inconclusive,
    )
