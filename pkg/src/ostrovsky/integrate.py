"""Time evolution of the truncated spectral system.

The dynamics ``â_t = -i m(n) â - (in/2)(u²)^(n)`` couples a stiff linear
rotation (|m(N)| ~ N³) to a quadratic convolution.  The scheme is an
integrating-factor RK4 in the interaction picture: each mode is wrapped
in its exact linear phase so the RK stages see only the nonlinearity,
and with the nonlinearity disabled the stepped flow *is* the exact free
flow.  Phases always come from absolute time rather than per-step
accumulation, so no phase drift builds up over long runs.

Every step ends (by default) with a classical two-constraint orthogonal
projection onto the manifold where the L² norm and the energy invariant
take their initial values, solved by a small Newton iteration.  Both
functionals are exact constants of the truncated flow; enforcing them
keeps ensemble statistics on the correct invariant sphere even in
regimes where the raw trajectory error is dominated by under-resolved
advection.  Projection preserves the RK order and the structural
mean-zero/Hermitian properties.

A compiled kernel (see ``_kernels.pyx``) runs whole multi-step segments
in C when available; an algorithmically identical numpy fallback is
selected at import time otherwise, or when ``OSTROVSKY_FORCE_PYTHON`` is
set.  Results are bit-reproducible per backend; the two backends agree
to rounding accumulation (~1e-10 per unit time), not bitwise.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .spectral import (
    SpectralState,
    conserved_energy,
    dispersion_table,
    l2_norm,
    load_spectrum,
    make_state,
    save_spectrum,
    to_physical,
    square_spectrum,
)

try:
    from . import _kernels
except ImportError:  # pragma: no cover - exercised via the env override
    _kernels = None

HAVE_COMPILED = _kernels is not None

__all__ = [
    "SimConfig",
    "Trajectory",
    "BlowUpError",
    "HAVE_COMPILED",
    "active_backend",
    "linear_flow",
    "cfl_bound",
    "step",
    "evolve",
    "evolve_to_times",
    "iter_segments",
    "divergence_estimate",
    "rhs",
    "save_trajectory",
    "load_trajectory",
]

_NEWTON_TOL = 1e-13
_NEWTON_MAX_ITER = 25


def active_backend(backend: str | None = None) -> str:
    """Resolve the stepping backend: 'compiled' or 'python'."""
    if backend is not None:
        if backend not in ("compiled", "python"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "compiled" and not HAVE_COMPILED:
            raise RuntimeError("compiled kernel not built")
        return backend
    if os.environ.get("OSTROVSKY_FORCE_PYTHON", "").strip() not in ("", "0"):
        return "python"
    return "compiled" if HAVE_COMPILED else "python"


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation run.

    Attributes
    ----------
    N : int
        Spectral cutoff (>= 2).
    dt : float
        Requested time step; the effective step is clamped to the
        advective stability bound of the initial data.
    T : float
        Time horizon (>= 0).
    scheme : str
        Always "IFRK4" (integrating-factor RK4 with invariant
        projection).
    snapshot_stride : int
        Record every stride-th step (plus t = 0 and t = T).
    seed : int
        64-bit seed identifying the run's random data.
    """

    N: int
    dt: float
    T: float
    scheme: str = "IFRK4"
    snapshot_stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("cutoff N must be >= 2")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("horizon T must be >= 0")
        if self.scheme != "IFRK4":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """A time-ordered sequence of states produced by :func:`evolve`."""

    config: SimConfig
    times: tuple = field(default_factory=tuple)
    snapshots: tuple = field(default_factory=tuple)
    dt_effective: float = 0.0

    def __post_init__(self):
        if len(self.times) != len(self.snapshots):
            raise ValueError("times and snapshots must align")
        if len(self.times) == 0:
            raise ValueError("trajectory cannot be empty")
        if any(t2 <= t1 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if self.times[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if any(s.cutoff != self.config.N for s in self.snapshots):
            raise ValueError("snapshot cutoff differs from config.N")

    @property
    def final_state(self) -> SpectralState:
        return self.snapshots[-1]


class BlowUpError(RuntimeError):
    """A non-finite amplitude appeared during stepping.

    Attributes
    ----------
    time : float
        Model time at which the failure was detected.
    partial : Trajectory or None
        Recorded snapshots up to the last finite state.
    """

    def __init__(self, time: float, partial: Trajectory | None = None):
        super().__init__(f"non-finite amplitude at t = {time:.6g}")
        self.time = time
        self.partial = partial


def linear_flow(state: SpectralState, t: float) -> SpectralState:
    """Exact free evolution: a_n -> e^{-i m(n) t} a_n (no stepping)."""
    m = dispersion_table(state.cutoff)
    return SpectralState(np.exp(-1j * m * t) * state.modes)


def cfl_bound(state: SpectralState) -> float:
    """Advective stability bound dt <= 0.5 / (N · max|u|).

    The linear part is integrated exactly, so only transport at speed
    ~|u| across the finest resolved scale constrains the step.
    """
    cutoff = state.cutoff
    grid = max(64, 8 * cutoff)
    umax = float(np.max(np.abs(to_physical(state, grid))))
    if umax == 0.0:
        return math.inf
    return 0.5 / (cutoff * umax)


def rhs(modes: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """Right-hand side -i m a - (in/2)(u²)^ on raw coefficients."""
    cutoff = modes.size
    m = dispersion_table(cutoff)
    k = np.arange(1, cutoff + 1)
    nonlin = -0.5j * k * square_spectrum(modes)[1:]
    return sign * (-1j * m * modes + nonlin)


# ---------------------------------------------------------------------------
# numpy fallback segment stepper (mirrors _kernels.evolve_segment)
# ---------------------------------------------------------------------------


def _invariant_pair(modes: np.ndarray) -> tuple[float, float]:
    """(squared L² norm, energy invariant) of raw coefficients."""
    state = make_state(modes)
    return l2_norm(state) ** 2, conserved_energy(state)


def _energy_and_square(modes: np.ndarray, weights: np.ndarray):
    sq = square_spectrum(modes)[1:]
    quad = 2.0 * np.pi * np.sum(weights * np.abs(modes) ** 2)
    cubic = 4.0 * np.pi * np.real(np.sum(sq * np.conj(modes)))
    return quad + cubic / 6.0, sq


def _project_py(a: np.ndarray, c1: float, c2: float) -> np.ndarray:
    """Newton projection onto {L² = c1, energy = c2}; mirrors the kernel.

    As in the kernel, once the pre-update residual is below
    sqrt(tol)·scale the quadratic contraction guarantees the updated
    point is within tol·scale, and the verification pass is skipped.
    """
    cutoff = a.size
    k = np.arange(1, cutoff + 1, dtype=np.float64)
    weights = k**2 - k**-2
    energy0, sq0 = _energy_and_square(a, weights)
    d2 = 4.0 * np.pi * weights * a + 2.0 * np.pi * sq0
    scale1 = max(1.0, abs(c1))
    scale2 = max(1.0, abs(c2))
    skip = math.sqrt(_NEWTON_TOL)
    lam = np.zeros(2)
    x = a
    energy_x, sq_x = energy0, sq0
    for _ in range(_NEWTON_MAX_ITER):
        g = np.array([4.0 * np.pi * np.sum(np.abs(x) ** 2) - c1, energy_x - c2])
        if abs(g[0]) < _NEWTON_TOL * scale1 and abs(g[1]) < _NEWTON_TOL * scale2:
            return x
        small = abs(g[0]) < skip * scale1 and abs(g[1]) < skip * scale2
        grad1 = 8.0 * np.pi * x
        grad2 = 4.0 * np.pi * weights * x + 2.0 * np.pi * sq_x

        def rdot(z, w):
            return float(np.sum(np.real(np.conj(z) * w)))

        jac = np.array(
            [[rdot(grad1, a), rdot(grad1, d2)], [rdot(grad2, a), rdot(grad2, d2)]]
        )
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if abs(det) <= 1e-14 * (
            abs(jac[0, 0] * jac[1, 1]) + abs(jac[0, 1] * jac[1, 0])
        ) + 1e-300:
            if abs(jac[0, 0]) <= 1e-300:
                return x
            lam[0] += -g[0] / jac[0, 0]
            small = False
        else:
            lam += np.linalg.solve(jac, -g)
        x = a + lam[0] * a + lam[1] * d2
        if small:
            return x
        energy_x, sq_x = _energy_and_square(x, weights)
    return x


def _segment_py(a0, m, t0, dt, nsteps, nl_sign, enforce, c1, c2):
    """Pure-numpy multi-step segment; same contract as the kernel."""
    cutoff = a0.size
    k = np.arange(1, cutoff + 1)
    a = a0.copy()
    fh = np.exp(-1j * m * (dt / 2.0))

    def nonlin(modes):
        return nl_sign * (-0.5j) * k * square_spectrum(modes)[1:]

    for k_step in range(nsteps):
        t = t0 + k_step * dt
        prev = a
        ph = np.exp(-1j * m * t)
        v = np.conj(ph) * a
        g1 = np.conj(ph) * nonlin(ph * v)
        ph = ph * fh
        g2 = np.conj(ph) * nonlin(ph * (v + 0.5 * dt * g1))
        g3 = np.conj(ph) * nonlin(ph * (v + 0.5 * dt * g2))
        ph = ph * fh
        g4 = np.conj(ph) * nonlin(ph * (v + dt * g3))
        v = v + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        a = ph * v
        if not np.all(np.isfinite(a.view(np.float64))):
            return prev, k_step
        if enforce:
            a = _project_py(a, c1, c2)
            if not np.all(np.isfinite(a.view(np.float64))):
                return prev, k_step
    return a, nsteps


def _run_segment(a, m, t0, dt, nsteps, nl_sign, enforce, c1, c2, backend):
    if nsteps == 0:
        return a.copy(), 0
    if backend == "compiled":
        return _kernels.evolve_segment(
            np.ascontiguousarray(a),
            np.ascontiguousarray(m),
            float(t0),
            float(dt),
            int(nsteps),
            float(nl_sign),
            bool(enforce),
            float(c1),
            float(c2),
            _NEWTON_TOL,
            _NEWTON_MAX_ITER,
        )
    return _segment_py(a, m, t0, dt, nsteps, nl_sign, enforce, c1, c2)


# ---------------------------------------------------------------------------
# public stepping API
# ---------------------------------------------------------------------------


def step(
    state: SpectralState,
    dt: float,
    t0: float = 0.0,
    *,
    include_nonlinear: bool = True,
    enforce_invariants: bool = True,
    direction: int = 1,
    backend: str | None = None,
) -> SpectralState:
    """One RK4 step of length dt starting at absolute time t0.

    ``direction=-1`` integrates the negated vector field (exact time
    reversal of the dynamics).  Local truncation error is O(dt⁵); with
    ``include_nonlinear=False`` the step is the exact free flow.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if not include_nonlinear:
        return linear_flow(state, direction * dt)
    m = direction * dispersion_table(state.cutoff)
    c1, c2 = _invariant_pair(state.modes)
    out, done = _run_segment(
        state.modes, m, t0, dt, 1, float(direction), enforce_invariants,
        c1, c2, active_backend(backend),
    )
    if done < 1:
        raise BlowUpError(t0 + dt)
    return SpectralState(out)


def _snapshot_schedule(total_steps: int, stride: int, remainder: float):
    """Step indices after which a snapshot is recorded."""
    marks = list(range(stride, total_steps + 1, stride))
    if total_steps not in marks and (remainder == 0.0) and total_steps > 0:
        marks.append(total_steps)
    return marks


def evolve(
    state: SpectralState,
    config: SimConfig,
    *,
    include_nonlinear: bool = True,
    enforce_invariants: bool = True,
    direction: int = 1,
    backend: str | None = None,
) -> Trajectory:
    """Advance to the horizon T, recording every stride-th state.

    The effective step is ``min(config.dt, cfl_bound(u0))`` (clamping is
    deterministic and recorded on the trajectory); the last partial step
    is shortened exactly so the final time is T.  A non-finite amplitude
    raises :class:`BlowUpError` with the recorded prefix attached.
    """
    if state.cutoff != config.N:
        raise ValueError("state cutoff differs from config.N")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")

    if config.T == 0.0:
        return Trajectory(config, (0.0,), (state,), dt_effective=config.dt)

    dt = min(config.dt, cfl_bound(state)) if include_nonlinear else config.dt
    total_steps = int(math.floor(config.T / dt + 1e-12))
    remainder = config.T - total_steps * dt
    if remainder < 1e-12 * config.T:
        remainder = 0.0

    if not include_nonlinear:
        # The stepped scheme is the exact free flow here; evaluate it
        # directly at the recorded times.
        times = [0.0]
        for mark in _snapshot_schedule(total_steps, config.snapshot_stride, remainder):
            times.append(mark * dt)
        if remainder > 0.0 or not times or times[-1] != config.T:
            if times[-1] < config.T:
                times.append(config.T)
        snaps = [linear_flow(state, direction * t) for t in times]
        return Trajectory(config, tuple(times), tuple(snaps), dt_effective=dt)

    m = direction * dispersion_table(config.N)
    c1, c2 = _invariant_pair(state.modes)
    chosen = active_backend(backend)
    l2_ref = math.sqrt(c1)

    times = [0.0]
    snaps = [state]
    a = state.modes
    done_steps = 0
    while done_steps < total_steps:
        seg = min(config.snapshot_stride, total_steps - done_steps)
        a_new, seg_done = _run_segment(
            a, m, done_steps * dt, dt, seg, float(direction),
            enforce_invariants, c1, c2, chosen,
        )
        if seg_done < seg:
            partial = Trajectory(
                config, tuple(times), tuple(snaps), dt_effective=dt
            )
            raise BlowUpError((done_steps + seg_done + 1) * dt, partial)
        a = a_new
        done_steps += seg
        if done_steps % config.snapshot_stride == 0 or done_steps == total_steps:
            t_now = done_steps * dt
            if remainder == 0.0 and done_steps == total_steps:
                t_now = config.T  # land exactly on the horizon
            times.append(t_now)
            snaps.append(SpectralState(a))
            if l2_norm(snaps[-1]) > 2.0 * l2_ref:
                # Advective bound is defined by the initial data; a
                # doubled norm voids it (cannot occur while projection
                # is active — L² is pinned).
                if dt > cfl_bound(snaps[-1]):
                    raise RuntimeError(
                        "time step exceeds the stability bound after norm growth"
                    )
                l2_ref = l2_norm(snaps[-1])
    if remainder > 0.0:
        a_new, seg_done = _run_segment(
            a, m, total_steps * dt, remainder, 1, float(direction),
            enforce_invariants, c1, c2, chosen,
        )
        if seg_done < 1:
            partial = Trajectory(config, tuple(times), tuple(snaps), dt_effective=dt)
            raise BlowUpError(config.T, partial)
        times.append(config.T)
        snaps.append(SpectralState(a_new))
    return Trajectory(config, tuple(times), tuple(snaps), dt_effective=dt)


def evolve_to_times(
    state: SpectralState,
    times,
    dt: float,
    *,
    include_nonlinear: bool = True,
    enforce_invariants: bool = True,
    backend: str | None = None,
):
    """States at the requested times only (ensemble-friendly evolve).

    ``times`` must be strictly increasing and positive.  The effective
    step is clamped to the stability bound of the initial data; each
    inter-time gap is an integer number of steps plus one exactly
    shortened step.  Returns a list of SpectralStates aligned with
    ``times``.  Raises :class:`BlowUpError` on failure.
    """
    times = [float(t) for t in times]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])) or (times and times[0] <= 0):
        raise ValueError("times must be strictly increasing and positive")
    if not include_nonlinear:
        return [linear_flow(state, t) for t in times]
    dt_eff = min(dt, cfl_bound(state))
    m = dispersion_table(state.cutoff)
    c1, c2 = _invariant_pair(state.modes)
    chosen = active_backend(backend)
    out = []
    a = state.modes
    t_prev = 0.0
    for t_next in times:
        gap = t_next - t_prev
        nsteps = int(math.floor(gap / dt_eff + 1e-12))
        remainder = gap - nsteps * dt_eff
        if remainder < 1e-12 * max(1.0, abs(t_next)):
            remainder = 0.0
        a, done = _run_segment(
            a, m, t_prev, dt_eff, nsteps, 1.0, enforce_invariants, c1, c2, chosen
        )
        if done < nsteps:
            raise BlowUpError(t_prev + (done + 1) * dt_eff)
        if remainder > 0.0:
            a, done = _run_segment(
                a, m, t_prev + nsteps * dt_eff, remainder, 1, 1.0,
                enforce_invariants, c1, c2, chosen,
            )
            if done < 1:
                raise BlowUpError(t_next)
        out.append(SpectralState(a))
        t_prev = t_next
    return out


def iter_segments(
    state: SpectralState,
    dt: float,
    horizon: float,
    chunk_steps: int,
    *,
    enforce_invariants: bool = True,
    backend: str | None = None,
):
    """Yield (t, raw_modes) every chunk_steps steps up to the horizon.

    The first yield is (0.0, initial modes); the last lands exactly on
    the horizon via a shortened step.  Used by observers that track
    running statistics (e.g. sup of a norm along a trajectory) without
    storing snapshots.
    """
    dt_eff = min(dt, cfl_bound(state))
    total_steps = int(math.floor(horizon / dt_eff + 1e-12))
    remainder = horizon - total_steps * dt_eff
    if remainder < 1e-12 * max(1.0, horizon):
        remainder = 0.0
    m = dispersion_table(state.cutoff)
    c1, c2 = _invariant_pair(state.modes)
    chosen = active_backend(backend)
    a = state.modes
    yield 0.0, a
    done_steps = 0
    while done_steps < total_steps:
        seg = min(chunk_steps, total_steps - done_steps)
        a, seg_done = _run_segment(
            a, m, done_steps * dt_eff, dt_eff, seg, 1.0,
            enforce_invariants, c1, c2, chosen,
        )
        if seg_done < seg:
            raise BlowUpError((done_steps + seg_done + 1) * dt_eff)
        done_steps += seg
        yield done_steps * dt_eff, a
    if remainder > 0.0:
        a, seg_done = _run_segment(
            a, m, total_steps * dt_eff, remainder, 1, 1.0,
            enforce_invariants, c1, c2, chosen,
        )
        if seg_done < 1:
            raise BlowUpError(horizon)
        yield horizon, a


def divergence_estimate(state: SpectralState, h: float = 1e-5) -> float:
    """Central-difference divergence of the vector field at the state.

    The field is viewed as a map of the 2N real coordinates
    (Re a_1, Im a_1, ..., Re a_N, Im a_N); the estimate is
    Σ_i [F_i(x + h_eff e_i) - F_i(x - h_eff e_i)] / (2 h_eff) with
    h_eff = h · max(1, max-coordinate).  Analytically the divergence
    vanishes: the linear part is a direct sum of rotations and the
    convolution has no diagonal dependence because mode 0 is absent.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    modes = np.array(state.modes)
    h_eff = h * max(1.0, float(np.max(np.abs(modes.view(np.float64))))
                    if modes.size else 1.0)
    total = 0.0
    for idx in range(modes.size):
        for comp in (1.0, 1j):
            bump = np.zeros_like(modes)
            bump[idx] = comp * h_eff
            f_plus = rhs(modes + bump)[idx]
            f_minus = rhs(modes - bump)[idx]
            diff = (f_plus - f_minus) / (2.0 * h_eff)
            total += diff.real if comp == 1.0 else diff.imag
    return float(total)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _snapshot_filename(t: float) -> str:
    return f"t={t:.12g}.csv"


def save_trajectory(trajectory: Trajectory, directory) -> list:
    """Write a trajectory as a directory of plain-text artifacts.

    Layout: ``config.json`` holding the run parameters (keys N, dt, T,
    scheme, stride, seed; sorted, UTF-8) plus one spectrum snapshot file
    per recorded time named ``t=<decimal>.csv``.  Returns the list of
    written paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cfg = trajectory.config
    config_path = directory / "config.json"
    payload = {
        "N": cfg.N,
        "T": cfg.T,
        "dt": cfg.dt,
        "scheme": cfg.scheme,
        "seed": cfg.seed,
        "stride": cfg.snapshot_stride,
    }
    config_path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    written = [config_path]
    for t, snap in zip(trajectory.times, trajectory.snapshots):
        path = directory / _snapshot_filename(t)
        save_spectrum(snap, path)
        written.append(path)
    return written


def load_trajectory(directory) -> Trajectory:
    """Read back a directory written by :func:`save_trajectory`.

    ``dt_effective`` is not persisted; it is inferred from the first
    snapshot gap when possible and left 0.0 for single-snapshot runs.
    """
    directory = Path(directory)
    config_path = directory / "config.json"
    if not config_path.is_file():
        raise FileNotFoundError(f"missing {config_path}")
    payload = json.loads(config_path.read_text(encoding="utf-8"))
    config = SimConfig(
        N=int(payload["N"]),
        dt=float(payload["dt"]),
        T=float(payload["T"]),
        scheme=str(payload["scheme"]),
        snapshot_stride=int(payload["stride"]),
        seed=int(payload["seed"]),
    )
    entries = []
    for path in directory.glob("t=*.csv"):
        stem = path.name[len("t="):-len(".csv")]
        try:
            t = float(stem)
        except ValueError as exc:
            raise ValueError(f"bad snapshot filename {path.name!r}") from exc
        entries.append((t, load_spectrum(path)))
    if not entries:
        raise ValueError(f"no snapshots found in {directory}")
    entries.sort(key=lambda item: item[0])
    times = tuple(t for t, _ in entries)
    snapshots = tuple(s for _, s in entries)
    dt_eff = 0.0
    if len(times) >= 2:
        dt_eff = (times[1] - times[0]) / config.snapshot_stride
    return Trajectory(
        config=config, times=times, snapshots=snapshots, dt_effective=dt_eff
    )
