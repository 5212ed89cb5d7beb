"""Time stepping: exact free flow, invariant projection, backends, files."""

import math

import numpy as np
import pytest

import ostrovsky.integrate as integrate
from conftest import random_modes
from ostrovsky.integrate import (
    HAVE_COMPILED,
    BlowUpError,
    SimConfig,
    Trajectory,
    active_backend,
    cfl_bound,
    divergence_estimate,
    evolve,
    evolve_to_times,
    iter_segments,
    linear_flow,
    load_trajectory,
    rhs,
    save_trajectory,
    step,
)
from ostrovsky.spectral import (
    SpectralState,
    conserved_energy,
    dispersion_table,
    l2_norm,
    make_state,
    nonlinear_term,
    zero_state,
)

needs_kernel = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")


def white(cutoff: int, seed: int) -> SpectralState:
    return make_state(random_modes(cutoff, seed))


# ---------------------------------------------------------------------------
# configuration objects
# ---------------------------------------------------------------------------


def test_simconfig_validation():
    with pytest.raises(ValueError, match="N"):
        SimConfig(N=1, dt=1e-3, T=1.0)
    with pytest.raises(ValueError, match="dt"):
        SimConfig(N=4, dt=0.0, T=1.0)
    with pytest.raises(ValueError, match="T"):
        SimConfig(N=4, dt=1e-3, T=-1.0)
    with pytest.raises(ValueError, match="scheme"):
        SimConfig(N=4, dt=1e-3, T=1.0, scheme="euler")
    with pytest.raises(ValueError, match="stride"):
        SimConfig(N=4, dt=1e-3, T=1.0, snapshot_stride=0)


def test_trajectory_validation():
    cfg = SimConfig(N=2, dt=1e-3, T=1.0)
    s = zero_state(2)
    with pytest.raises(ValueError, match="align"):
        Trajectory(cfg, (0.0, 1.0), (s,))
    with pytest.raises(ValueError, match="empty"):
        Trajectory(cfg, (), ())
    with pytest.raises(ValueError, match="start"):
        Trajectory(cfg, (1.0,), (s,))
    with pytest.raises(ValueError, match="increasing"):
        Trajectory(cfg, (0.0, 0.0), (s, s))
    with pytest.raises(ValueError, match="cutoff"):
        Trajectory(cfg, (0.0,), (zero_state(3),))


def test_active_backend_resolution(monkeypatch):
    assert active_backend() in ("compiled", "python")
    assert active_backend("python") == "python"
    with pytest.raises(ValueError):
        active_backend("fortran")
    monkeypatch.setenv("OSTROVSKY_FORCE_PYTHON", "1")
    assert active_backend() == "python"


# ---------------------------------------------------------------------------
# free flow
# ---------------------------------------------------------------------------


def test_linear_flow_matches_phase_formula():
    state = white(64, 0)
    for t in (0.1, 1.0, -2.5):
        expected = np.exp(-1j * dispersion_table(64) * t) * state.modes
        assert np.array_equal(linear_flow(state, t).modes, expected)


def test_linear_flow_leaves_mode_one_fixed():
    state = white(8, 1)
    for t in (0.3, 7.0, 123.0):
        assert linear_flow(state, t).modes[0] == state.modes[0]


def test_linear_step_equals_linear_flow():
    state = white(16, 2)
    out = step(state, 0.37, include_nonlinear=False)
    assert np.array_equal(out.modes, linear_flow(state, 0.37).modes)


def test_free_evolve_equals_linear_flow():
    state = white(16, 3)
    traj = evolve(state, SimConfig(N=16, dt=1e-2, T=0.5, snapshot_stride=7),
                  include_nonlinear=False)
    for t, snap in zip(traj.times, traj.snapshots):
        assert np.max(np.abs(snap.modes - linear_flow(state, t).modes)) <= 1e-13


# ---------------------------------------------------------------------------
# nonlinear stepping
# ---------------------------------------------------------------------------


def test_rhs_is_linear_plus_advective_part():
    state = white(12, 4)
    expected = (-1j * dispersion_table(12) * state.modes
                + nonlinear_term(state).modes)
    assert np.allclose(rhs(state.modes), expected, atol=1e-14)
    assert np.allclose(rhs(state.modes, -1.0), -expected, atol=1e-14)


def test_step_rejects_bad_direction():
    with pytest.raises(ValueError, match="direction"):
        step(white(4, 5), 1e-3, direction=2)


def test_projection_pins_both_invariants():
    state = white(32, 6)
    l2_0 = l2_norm(state)
    energy_0 = conserved_energy(state)
    final = evolve_to_times(state, [0.1], 1e-3)[0]
    assert abs(l2_norm(final) - l2_0) <= 1e-12 * l2_0
    assert abs(conserved_energy(final) - energy_0) <= 1e-9 * max(1.0, abs(energy_0))


def test_unprojected_drift_is_small_but_visible():
    state = white(16, 6)
    l2_0 = l2_norm(state)
    final = evolve_to_times(state, [0.05], 1e-4, enforce_invariants=False)[0]
    drift = abs(l2_norm(final) - l2_0) / l2_0
    assert 1e-12 < drift < 1e-6  # scheme-level drift, far above rounding


def test_reverse_direction_recovers_initial_state():
    state = white(16, 42)
    dt = 1e-4
    forward = evolve_to_times(state, [0.01], dt, enforce_invariants=False)[0]
    back = forward
    for j in range(100):
        back = step(back, dt, t0=j * dt, enforce_invariants=False, direction=-1)
    assert np.max(np.abs(back.modes - state.modes)) < 1e-6


@needs_kernel
def test_backends_agree_closely():
    state = white(32, 7)
    compiled = evolve_to_times(state, [0.2], 1e-3, backend="compiled")[0]
    python = evolve_to_times(state, [0.2], 1e-3, backend="python")[0]
    assert np.max(np.abs(compiled.modes - python.modes)) < 1e-12


def test_evolve_to_times_matches_evolve():
    state = white(16, 8)
    traj = evolve(state, SimConfig(N=16, dt=1e-3, T=0.2, snapshot_stride=50))
    direct = evolve_to_times(state, [0.2], 1e-3)[0]
    assert np.max(np.abs(traj.final_state.modes - direct.modes)) < 1e-12


def test_evolve_to_times_validates_grid():
    state = white(4, 9)
    with pytest.raises(ValueError, match="increasing"):
        evolve_to_times(state, [0.2, 0.1], 1e-3)
    with pytest.raises(ValueError, match="positive"):
        evolve_to_times(state, [0.0, 0.1], 1e-3)


def test_evolve_checks_state_cutoff():
    with pytest.raises(ValueError, match="cutoff"):
        evolve(white(4, 10), SimConfig(N=8, dt=1e-3, T=0.1))


def test_evolve_records_endpoints_and_stride():
    state = white(8, 11)
    traj = evolve(state, SimConfig(N=8, dt=1e-3, T=0.05, snapshot_stride=10))
    assert traj.times[0] == 0.0
    assert traj.times[-1] == 0.05
    assert np.allclose(np.diff(traj.times), 0.01)
    assert traj.dt_effective <= 1e-3


def test_zero_horizon_returns_initial_state():
    state = white(4, 12)
    traj = evolve(state, SimConfig(N=4, dt=1e-3, T=0.0))
    assert traj.times == (0.0,)
    assert np.array_equal(traj.final_state.modes, state.modes)


def test_iter_segments_covers_horizon():
    state = white(8, 13)
    seen = list(iter_segments(state, 1e-3, 0.02, 5))
    times = [t for t, _ in seen]
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.02, abs=1e-12)
    assert all(t2 > t1 for t1, t2 in zip(times, times[1:]))
    assert np.array_equal(seen[0][1], state.modes)


# ---------------------------------------------------------------------------
# stability safeguards
# ---------------------------------------------------------------------------


def test_cfl_bound_scales_inversely_with_amplitude():
    state = white(16, 14)
    doubled = make_state(2.0 * state.modes)
    assert cfl_bound(doubled) == pytest.approx(cfl_bound(state) / 2.0, rel=1e-12)
    assert cfl_bound(zero_state(16)) == math.inf


def test_step_detects_overflow_blow_up():
    huge = make_state([1e200, 1e200])
    with np.errstate(all="ignore"):
        with pytest.raises(BlowUpError, match="non-finite"):
            step(huge, 1.0, enforce_invariants=False)
        with pytest.raises(BlowUpError):
            step(huge, 1.0, enforce_invariants=False, backend="python")


def test_evolve_blow_up_carries_recorded_prefix(monkeypatch):
    state = white(8, 15)
    calls = []

    def failing_segment(a, m, t0, dt, nsteps, sign, enforce, c1, c2, backend):
        calls.append(t0)
        done = nsteps if len(calls) <= 2 else 0  # fail in the third chunk
        return a, done

    monkeypatch.setattr(integrate, "_run_segment", failing_segment)
    with pytest.raises(BlowUpError) as excinfo:
        evolve(state, SimConfig(N=8, dt=1e-2, T=0.1, snapshot_stride=1))
    partial = excinfo.value.partial
    assert partial is not None
    assert partial.times[0] == 0.0
    assert len(partial.times) == 3  # initial state plus the two finished chunks


# ---------------------------------------------------------------------------
# divergence of the vector field
# ---------------------------------------------------------------------------


def test_vector_field_is_divergence_free():
    for seed in range(3):
        state = white(8, 20 + seed)
        divergence = abs(divergence_estimate(state))
        field_norm = float(np.linalg.norm(rhs(state.modes)))
        assert divergence <= 1e-6 * field_norm


def test_divergence_estimate_rejects_bad_step():
    with pytest.raises(ValueError):
        divergence_estimate(white(4, 23), h=0.0)


# ---------------------------------------------------------------------------
# trajectory persistence
# ---------------------------------------------------------------------------


def test_trajectory_round_trip_is_bit_exact(tmp_path):
    state = white(8, 30)
    traj = evolve(state, SimConfig(N=8, dt=1e-3, T=0.02, snapshot_stride=5, seed=30))
    written = save_trajectory(traj, tmp_path / "run")
    assert (tmp_path / "run" / "config.json").exists()
    assert len(written) == 1 + len(traj.times)
    back = load_trajectory(tmp_path / "run")
    assert back.config == traj.config
    assert back.times == traj.times
    for mine, theirs in zip(traj.snapshots, back.snapshots):
        assert np.array_equal(mine.modes, theirs.modes)
    assert back.dt_effective == pytest.approx(traj.dt_effective, rel=1e-12)


def test_load_trajectory_requires_config(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_trajectory(tmp_path / "nowhere")


def test_load_trajectory_requires_snapshots(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "config.json").write_text(
        '{"N": 4, "T": 1.0, "dt": 0.001, "scheme": "IFRK4", "seed": 0, "stride": 1}'
    )
    with pytest.raises(ValueError, match="snapshots"):
        load_trajectory(run)
