"""Command-line driver for simulation, sampling tests, norms, and scans.

One entry point, six workhorse subcommands plus a backend benchmark::

    ostrovsky simulate   --n 64 --dt 1e-4 --t 1 --seed 7 --init white-noise
    ostrovsky invariance --n 32 --samples 10000 --times 0.5,1 --seed 1
    ostrovsky tail       --n 64 --samples 100000 --seed 2
    ostrovsky growth     --n 32 --samples 1000 --horizons 1,10 --seed 3
    ostrovsky norms      --input spectrum.csv --s -0.49 --p 2.05
    ostrovsky verify     resonance --l 128
    ostrovsky bench      --n 64 --steps 2000

Every run writes a ``manifest.json`` (sorted keys, all defaults
materialized) into the output directory alongside its CSV artifacts, so
re-running from a manifest's parameters and seed reproduces the numeric
outputs bit-exactly in serial mode.  Exit codes are scriptable:
0 = pass, 1 = usage error, 2 = numerical failure or blow-up,
3 = statistical/certification failure, 4 = inconclusive.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import estimates, integrate, measure, norms, spectral

try:
    from importlib.metadata import version as _dist_version

    TOOL_VERSION = _dist_version("ostrovsky")
except Exception:  # pragma: no cover - metadata missing in odd installs
    TOOL_VERSION = "unknown"

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_STATISTICAL = 3
EXIT_INCONCLUSIVE = 4

_LEMMA_IDS = ("resonance", "weight", "gtv", "sum", "omega")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _utc_now() -> str:
    return (
        datetime.datetime.now(datetime.timezone.utc)
        .replace(microsecond=0)
        .isoformat()
        .replace("+00:00", "Z")
    )


class _Run:
    """Collects parameters and output files, then writes the manifest."""

    def __init__(self, command: str, out_dir: Path, seed: int, params: dict):
        self.command = command
        self.out_dir = out_dir
        self.seed = seed
        self.params = dict(params)
        self.outputs = []
        self.failure_count = 0
        self.started = _utc_now()
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        """Register an output file and return its full path."""
        self.outputs.append(name)
        return self.out_dir / name

    def add_outputs(self, paths) -> None:
        for p in paths:
            self.outputs.append(str(Path(p).relative_to(self.out_dir)))

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "failure_count": self.failure_count,
            "finished": _utc_now(),
            "outputs": sorted(self.outputs),
            "parameters": self.params,
            "seed": self.seed,
            "started": self.started,
            "version": TOOL_VERSION,
        }
        path = self.out_dir / "manifest.json"
        path.write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )


def _parse_floats(text: str, flag: str) -> tuple:
    try:
        values = tuple(float(piece) for piece in text.split(",") if piece.strip())
    except ValueError as exc:
        raise _UsageError(f"{flag} expects a comma-separated float list") from exc
    if not values:
        raise _UsageError(f"{flag} must name at least one value")
    return values


def _resolve_jobs(jobs) -> int:
    if jobs is None:
        return max(1, os.cpu_count() or 1)
    if jobs < 1:
        raise _UsageError("--jobs must be >= 1")
    return jobs


def _add_common(parser, default_out: str):
    parser.add_argument("--seed", type=int, default=0, help="64-bit run seed")
    parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="worker processes (default: all processors)",
    )
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(default_out),
        help="output directory for CSV artifacts and manifest.json",
    )


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _initial_state(args):
    """Resolve --init/--n into (state, cutoff); --n defaults to the file's."""
    if args.init.startswith("file:"):
        state = spectral.load_spectrum(args.init[len("file:"):])
        if args.n is not None and args.n != state.cutoff:
            raise _UsageError(
                f"--init file has cutoff {state.cutoff}, --n says {args.n}"
            )
        return state
    cutoff = 64 if args.n is None else args.n
    if args.init == "zero":
        return spectral.zero_state(cutoff)
    if args.init == "white-noise":
        return measure.sample_white_noise(cutoff, args.seed)
    raise _UsageError(
        f"unknown --init {args.init!r} (white-noise, zero, file:<path>)"
    )


def _cmd_simulate(args) -> int:
    state = _initial_state(args)
    args.n = state.cutoff
    stride = args.stride
    if stride is None:
        dt_eff = min(args.dt, integrate.cfl_bound(state))
        total_steps = max(1, int(np.ceil(args.t / dt_eff))) if args.t > 0 else 1
        stride = max(1, total_steps // 10)
    config = integrate.SimConfig(
        N=args.n,
        dt=args.dt,
        T=args.t,
        snapshot_stride=stride,
        seed=args.seed,
    )
    run = _Run(
        "simulate",
        args.out,
        args.seed,
        {
            "backend": args.backend or "auto",
            "dt": args.dt,
            "init": args.init,
            "n": args.n,
            "stride": stride,
            "t": args.t,
        },
    )
    code = EXIT_PASS
    try:
        trajectory = integrate.evolve(state, config, backend=args.backend)
    except integrate.BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        run.failure_count = 1
        if exc.partial is not None:
            run.add_outputs(
                integrate.save_trajectory(exc.partial, args.out / "trajectory")
            )
        run.finish()
        return EXIT_NUMERICAL

    run.add_outputs(integrate.save_trajectory(trajectory, args.out / "trajectory"))
    first, last = trajectory.snapshots[0], trajectory.final_state
    print(f"backend: {integrate.active_backend(args.backend)}")
    print(
        f"steps: {round(trajectory.times[-1] / trajectory.dt_effective) if trajectory.times[-1] else 0}"
        f"  dt_effective: {trajectory.dt_effective:.6g}"
    )
    for label, fn in (
        ("L2 drift", spectral.l2_norm),
        ("hamiltonian drift", spectral.hamiltonian),
        ("energy drift", spectral.conserved_energy),
    ):
        print(f"{label}: {abs(fn(last) - fn(first)):.6e}")
    print("mean drift: 0 (mean-zero by construction)")
    run.finish()
    return code


# ---------------------------------------------------------------------------
# statistical suites
# ---------------------------------------------------------------------------


def _cmd_invariance(args) -> int:
    times = _parse_floats(args.times, "--times")
    jobs = _resolve_jobs(args.jobs)
    run = _Run(
        "invariance",
        args.out,
        args.seed,
        {
            "alpha": args.alpha,
            "dt_divisor": args.dt_divisor,
            "jobs": jobs,
            "linear_only": args.linear_only,
            "n": args.n,
            "samples": args.samples,
            "times": list(times),
        },
    )
    report = measure.invariance_test(
        args.n,
        args.samples,
        times,
        args.seed,
        alpha=args.alpha,
        dt_divisor=args.dt_divisor,
        linear_only=args.linear_only,
        jobs=jobs,
    )
    report.to_csv(run.path("invariance.csv"))
    run.failure_count = len(report.failures)
    run.finish()
    print(report.summary())
    if report.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if report.passed else EXIT_STATISTICAL


def _cmd_tail(args) -> int:
    run = _Run(
        "tail",
        args.out,
        args.seed,
        {
            "grid_points": args.grid_points,
            "n": args.n,
            "p": args.p,
            "s": args.s,
            "samples": args.samples,
        },
    )
    report = measure.tail_test(
        args.n,
        args.samples,
        args.seed,
        s=args.s,
        p=args.p,
        grid_points=args.grid_points,
    )
    report.to_csv(run.path("tail.csv"))
    run.finish()
    print(report.summary())
    if report.degenerate:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if report.passed else EXIT_STATISTICAL


def _cmd_growth(args) -> int:
    horizons = _parse_floats(args.horizons, "--horizons")
    eps_grid = _parse_floats(args.eps, "--eps")
    jobs = _resolve_jobs(args.jobs)
    run = _Run(
        "growth",
        args.out,
        args.seed,
        {
            "dt_divisor": args.dt_divisor,
            "eps": list(eps_grid),
            "horizons": list(horizons),
            "jobs": jobs,
            "n": args.n,
            "observe_interval": args.observe_interval,
            "p": args.p,
            "s": args.s,
            "samples": args.samples,
        },
    )
    report = measure.growth_test(
        args.n,
        args.samples,
        horizons,
        args.seed,
        eps_grid=eps_grid,
        s=args.s,
        p=args.p,
        dt_divisor=args.dt_divisor,
        observe_interval=args.observe_interval,
        jobs=jobs,
    )
    report.to_csv(run.path("growth.csv"))
    run.failure_count = len(report.failures)
    run.finish()
    print(report.summary())
    if report.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if report.passed else EXIT_STATISTICAL


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _cmd_norms(args) -> int:
    if (args.input is None) == (args.init is None):
        raise _UsageError("norms needs exactly one of --input or --init")
    if args.input is not None:
        state = spectral.load_spectrum(args.input)
        source = f"file:{args.input}"
    else:
        if args.init != "white-noise":
            raise _UsageError("--init supports only 'white-noise'")
        state = measure.sample_white_noise(args.n, args.seed)
        source = "white-noise"
    run = _Run(
        "norms",
        args.out,
        args.seed,
        {"n": state.cutoff, "p": args.p, "s": args.s, "source": source},
    )
    profile = norms.dyadic_profile(state, args.s, args.p)
    with open(run.path("profile.csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write("j,block_norm\n")
        for j, value in enumerate(profile.block_norms):
            f.write(f"{j},{value:.17g}\n")
    run.finish()
    print(f"modes: {state.cutoff}")
    print(f"sobolev: {norms.sobolev_norm(state, args.s):.17g}")
    print(f"besov_sup: {profile.sup:.17g}")
    print(f"besov_l1: {profile.l1:.17g}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _run_scan(args):
    lemma = args.lemma
    if lemma == "resonance":
        return estimates.resonance_min_ratio(args.l)
    if lemma == "weight":
        return estimates.weight_bound_check(
            range(2, args.n_max + 1), eps=args.eps, delta=args.delta, c0=args.c0
        )
    if lemma == "gtv":
        if args.alpha is None or args.beta is None:
            raise _UsageError("verify gtv needs --alpha and --beta")
        return estimates.gtv_bound_check(args.alpha, args.beta)
    if lemma == "sum":
        if args.l1 is None or args.l2 is None:
            raise _UsageError("verify sum needs --l1 and --l2")
        return estimates.multiplier_sup_search(
            args.l1, args.l2, range(1, args.n_max + 1)
        )
    if lemma == "omega":
        return estimates.omega_bound_check(
            args.n_max,
            shell_log2_max=args.shell_log2_max,
            zeta=args.zeta,
            c0=args.c0,
        )
    raise _UsageError(f"unknown lemma id {lemma!r} (choose from {_LEMMA_IDS})")


def _cmd_verify(args) -> int:
    params = {
        key: getattr(args, key)
        for key in (
            "l", "n_max", "alpha", "beta", "l1", "l2",
            "eps", "delta", "c0", "zeta", "shell_log2_max",
        )
    }
    params["lemma"] = args.lemma
    try:
        report = _run_scan(args)
    except ValueError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run = _Run("verify", args.out, args.seed, params)
    report.to_csv(run.path(f"{args.lemma}.csv"))
    run.failure_count = 0 if report.passed else 1
    run.finish()
    print(report.summary())
    if args.lemma == "gtv":
        print(f"integral at a=0: {report.extra['a0_value']:.12g}")
    return EXIT_PASS if report.passed else EXIT_STATISTICAL


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _cmd_bench(args) -> int:
    state = measure.sample_white_noise(args.n, args.seed)
    dt = min(args.dt, integrate.cfl_bound(state))
    run = _Run(
        "bench",
        args.out,
        args.seed,
        {"dt": args.dt, "n": args.n, "steps": args.steps},
    )
    results = {}
    backends = ["python"] + (["compiled"] if integrate.HAVE_COMPILED else [])
    horizon = args.steps * dt
    for backend in backends:
        t0 = time.perf_counter()
        final = integrate.evolve_to_times(state, [horizon], dt, backend=backend)[0]
        elapsed = time.perf_counter() - t0
        results[backend] = (elapsed, args.steps / elapsed, final)
    with open(run.path("bench.csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write("backend,steps,seconds,steps_per_second\n")
        for backend, (elapsed, rate, _) in results.items():
            f.write(f"{backend},{args.steps},{elapsed:.17g},{rate:.17g}\n")
    run.finish()
    for backend, (elapsed, rate, _) in results.items():
        print(f"{backend}: {rate:,.0f} steps/s ({elapsed:.3f} s)")
    if len(results) == 2:
        diff = float(
            np.max(
                np.abs(results["python"][2].modes - results["compiled"][2].modes)
            )
        )
        print(f"backend max coefficient difference: {diff:.3e}")
    else:
        print("compiled kernel not built; benchmarked python backend only")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ostrovsky",
        description="Spectral simulator and statistical test bench for a "
        "third-order dispersive wave system on the circle.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {TOOL_VERSION}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve one initial state")
    p.add_argument("--n", type=int, default=None,
                   help="cutoff (default 64, or the input file's)")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--init", default="white-noise",
                   help="white-noise | zero | file:<path>")
    p.add_argument("--stride", type=int, default=None,
                   help="snapshot every k-th step (default: ~10 snapshots)")
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    _add_common(p, "simulate-out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("invariance", help="measure-invariance test")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--times", default="0.5,1")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--dt-divisor", type=float, default=8.0)
    p.add_argument("--linear-only", action="store_true")
    _add_common(p, "invariance-out")
    p.set_defaults(func=_cmd_invariance)

    p = sub.add_parser("tail", help="norm tail-decay test")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--s", type=float, default=norms.DEFAULT_S)
    p.add_argument("--p", type=float, default=norms.DEFAULT_P)
    p.add_argument("--grid-points", type=int, default=25)
    _add_common(p, "tail-out")
    p.set_defaults(func=_cmd_tail)

    p = sub.add_parser("growth", help="sup-in-time norm growth test")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--horizons", default="1,10")
    p.add_argument("--eps", default="0.2,0.1,0.05,0.02")
    p.add_argument("--s", type=float, default=norms.DEFAULT_S)
    p.add_argument("--p", type=float, default=norms.DEFAULT_P)
    p.add_argument("--dt-divisor", type=float, default=2.0)
    p.add_argument("--observe-interval", type=float, default=0.01)
    _add_common(p, "growth-out")
    p.set_defaults(func=_cmd_growth)

    p = sub.add_parser("norms", help="norms and dyadic profile of a spectrum")
    p.add_argument("--input", default=None, help="spectrum CSV file")
    p.add_argument("--init", default=None, help="generator: white-noise")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--s", type=float, default=norms.DEFAULT_S)
    p.add_argument("--p", type=float, default=norms.DEFAULT_P)
    _add_common(p, "norms-out")
    p.set_defaults(func=_cmd_norms)

    p = sub.add_parser("verify", help="run one certification scan")
    p.add_argument("lemma", choices=_LEMMA_IDS)
    p.add_argument("--l", type=int, default=128, help="resonance scan limit")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--l1", type=float, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.add_argument("--eps", type=float, default=estimates.DEFAULT_EPS)
    p.add_argument("--delta", type=float, default=estimates.DEFAULT_DELTA)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--zeta", type=float, default=estimates.DEFAULT_ZETA)
    p.add_argument("--shell-log2-max", type=int, default=20)
    _add_common(p, "verify-out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="compare stepping backends")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--dt", type=float, default=1e-5)
    p.add_argument("--steps", type=int, default=2000)
    _add_common(p, "bench-out")
    p.set_defaults(func=_cmd_bench)

    return parser


def _materialize_verify_defaults(args) -> None:
    """Per-lemma defaults for flags shared across lemma ids."""
    if args.n_max is None:
        args.n_max = {"weight": 32, "sum": 8, "omega": 64}.get(args.lemma, 32)
    if args.c0 is None:
        args.c0 = (
            estimates.DEFAULT_WEIGHT_C0
            if args.lemma == "weight"
            else estimates.DEFAULT_SMALL
        )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        _materialize_verify_defaults(args)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except integrate.BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
