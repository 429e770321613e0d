"""Command-line front end.

Every command writes plot-ready CSV or JSON carrying the parameters, seed
and tool version.  Exit status: 0 on success, 1 on a numerical or check
failure, 2 on a usage error.

When several (omega, delta) pairs are given, one file per pair is written
into the ``--output`` directory (default: ``$RFCASCADE_OUTPUT_DIR`` or the
current directory).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, correlation, dynamics, laplace, montecarlo, streamio, validation
from .params import AtomDriveParams, CascadeError, ParameterError

OUTPUT_DIR_ENV = "RFCASCADE_OUTPUT_DIR"
ROOT2 = math.sqrt(2.0)

PRESETS = {
    # the optimum and a factor-2 geometric progression around it
    "geometric": [(ROOT2, 0.0), (ROOT2 / 2, 0.0), (2 * ROOT2, 0.0)],
    "strong-resonant": [(2.2, 0.0), (4.4, 0.0)],
    "strong-detuned": [(2.8, -2.2), (4.4, -3.4)],
}


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


# -- output helpers


def _metadata(args, params: AtomDriveParams, **extra) -> dict:
    meta = {"tool": "rfcascade", "version": __version__, "command": args.command}
    meta.update(params.as_dict())
    meta.update(extra)
    return meta


def _format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_table(meta: dict, columns: dict, fmt: str) -> str:
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float).tolist() for n in names]
    if fmt == "json":
        return json.dumps({"metadata": meta, "columns": names, "data": dict(zip(names, data))}) + "\n"
    lines = [f"# {k}={_format_value(v)}" for k, v in meta.items()]
    lines.append(",".join(names))
    lines.extend(",".join(repr(x) for x in row) for row in zip(*data))
    return "\n".join(lines) + "\n"


def _output_dir(args) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _emit(args, outputs: list[tuple[AtomDriveParams, str]], ext: str) -> None:
    """Write one rendered text per parameter set."""
    if len(outputs) == 1 and (args.output or os.environ.get(OUTPUT_DIR_ENV)) is None:
        sys.stdout.write(outputs[0][1])
        return
    if len(outputs) == 1 and args.output and not Path(args.output).is_dir():
        Path(args.output).write_text(outputs[0][1], encoding="ascii")
        return
    out_dir = _output_dir(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    for params, text in outputs:
        name = f"{args.command}_omega={params.omega!r}_delta={params.delta!r}.{ext}"
        (out_dir / name).write_text(text, encoding="ascii")


# -- config validation


def _param_sets(args, need_drive: bool = True) -> list[AtomDriveParams]:
    if getattr(args, "preset", None):
        pairs = PRESETS[args.preset]
    else:
        omegas, deltas = args.omega, args.delta
        if len(deltas) == 1:
            deltas = deltas * len(omegas)
        elif len(omegas) == 1:
            omegas = omegas * len(deltas)
        if len(omegas) != len(deltas):
            raise UsageError("--delta", "give one detuning or as many as --omega values")
        pairs = list(zip(omegas, deltas))
    sets = []
    for omega, delta in pairs:
        if not args.gamma > 0 or not math.isfinite(args.gamma):
            raise UsageError("--gamma", f"must be a positive finite rate, got {args.gamma!r}")
        if not omega >= 0 or not math.isfinite(omega):
            raise UsageError("--omega", f"must be a non-negative finite rate, got {omega!r}")
        if need_drive and omega == 0:
            raise UsageError("--omega", "must be > 0 for this command")
        if not math.isfinite(delta):
            raise UsageError("--delta", f"must be finite, got {delta!r}")
        sets.append(AtomDriveParams(args.gamma * 1.0, omega * 1.0, delta * 1.0))
    return sets


def _time_grid(args, gamma: float) -> np.ndarray:
    tmax = args.tmax if args.tmax is not None else args.default_tmax / gamma
    if args.points < 2:
        raise UsageError("--points", "need at least 2 grid points")
    if not 0 <= args.tmin < tmax:
        raise UsageError("--tmax", f"need 0 <= tmin < tmax, got tmin={args.tmin!r}, tmax={tmax!r}")
    return np.linspace(args.tmin, tmax, args.points)


# -- commands


def cmd_delay_curve(args) -> int:
    outputs = []
    for params in _param_sets(args, need_drive=False):
        tau = _time_grid(args, params.gamma)
        curve = dynamics.delay_curve(params, tau)
        meta = _metadata(args, params, points=len(tau))
        cols = {"tau": tau, "K": curve["K"], "P": curve["P"], "lambda": curve["lambda"], "Lambda": curve["Lambda"]}
        outputs.append((params, render_table(meta, cols, args.format)))
    _emit(args, outputs, args.format)
    return 0


def stats_record(params: AtomDriveParams, window: float | None) -> dict:
    m = laplace.delay_moments(params)
    if window is None:
        window = 100.0 * m.mean_delay
    counts = laplace.counting_stats(params, window)
    return {
        "mean_delay": m.mean_delay,
        "delay_variance": m.delay_variance,
        "mandel_q": m.mandel_q,
        "one_plus_q": 1.0 + m.mandel_q,
        "mean_intensity": correlation.mean_intensity(params),
        "window": counts.window,
        "mean_count": counts.mean_count,
        "count_variance": counts.count_variance,
        "below_asymptotic_threshold": counts.below_asymptotic_threshold,
    }


def cmd_stats(args) -> int:
    if args.window is not None and not args.window > 0:
        raise UsageError("--window", f"must be > 0, got {args.window!r}")
    outputs = []
    for params in _param_sets(args):
        record = {"metadata": _metadata(args, params), **stats_record(params, args.window)}
        outputs.append((params, json.dumps(record) + "\n"))
    _emit(args, outputs, "json")
    return 0


def _frequency_grid(args, gamma: float) -> np.ndarray:
    if args.points < 2:
        raise UsageError("--points", "need at least 2 grid points")
    wmin = args.wmin * gamma
    wmax = args.wmax * gamma
    if args.scale == "log":
        if not 0 < wmin < wmax:
            raise UsageError("--wmin", "log grids need 0 < wmin < wmax")
        grid = np.logspace(math.log10(wmin), math.log10(wmax), args.points)
    else:
        if not 0 <= wmin < wmax:
            raise UsageError("--wmin", "need 0 <= wmin < wmax")
        grid = np.linspace(wmin, wmax, args.points)
    if grid[0] > 0:
        grid = np.concatenate([[0.0], grid])
    return grid


def cmd_spectrum(args) -> int:
    outputs = []
    for params in _param_sets(args):
        omega = _frequency_grid(args, params.gamma)
        q, s_i = correlation.noise_spectrum(params, omega)
        meta = _metadata(args, params, points=len(omega), mean_intensity=correlation.mean_intensity(params))
        cols = {"omega": omega, "Q": q, "one_plus_Q": 1.0 + q, "S_I": s_i}
        outputs.append((params, render_table(meta, cols, args.format)))
    _emit(args, outputs, args.format)
    return 0


def cmd_correlation(args) -> int:
    outputs = []
    for params in _param_sets(args):
        t = _time_grid(args, params.gamma)
        cols = {"t": t, "j": correlation.j_of_t(params, t)}
        if args.resonant:
            if params.delta != 0.0:
                raise UsageError("--resonant", "the resonant closed form needs --delta 0")
            cols["j0"] = correlation.j_resonant(params, t)
        if args.perturbative:
            cols["j_pert"] = correlation.j_perturbative(params, t)
        meta = _metadata(args, params, points=len(t), mean_intensity=correlation.mean_intensity(params))
        outputs.append((params, render_table(meta, cols, args.format)))
    _emit(args, outputs, args.format)
    return 0


def simulation_summary(stream: montecarlo.PhotonStream, window: float | None) -> dict:
    params = stream.params
    m = laplace.delay_moments(params)
    out = {
        "n_photons": stream.n_photons,
        "analytic": {"mean_delay": m.mean_delay, "delay_variance": m.delay_variance, "mandel_q": m.mandel_q},
    }
    if stream.n_photons >= 3:
        d = montecarlo.delay_summary(stream)
        out["empirical"] = {
            "mean_delay": d.mean,
            "mean_delay_standard_error": d.mean_standard_error,
            "delay_variance": d.variance,
            "delay_variance_standard_error": d.variance_standard_error,
            "q_from_delays": d.q_from_delays,
        }
    if window is None:
        window = 100.0 * m.mean_delay
    try:
        c = montecarlo.empirical_counting(stream, window)
    except ParameterError as exc:
        out.setdefault("empirical", {})["counting"] = {"window": window, "skipped": str(exc)}
    else:
        out.setdefault("empirical", {})["counting"] = {
            "window": window,
            "n_windows": c.n_windows,
            "mean_count": c.mean_count,
            "count_variance": c.count_variance,
            "q_hat": c.q_estimate,
            "q_hat_standard_error": c.q_standard_error,
            "q_hat_deviation_sigma": (c.q_estimate - m.mandel_q) / c.q_standard_error,
        }
    return out


def cmd_simulate(args) -> int:
    if args.photons < 1:
        raise UsageError("--photons", f"must be >= 1, got {args.photons!r}")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed", "must be in [0, 2**64)")
    if args.window is not None and not args.window > 0:
        raise UsageError("--window", f"must be > 0, got {args.window!r}")
    sets = _param_sets(args)
    if len(sets) != 1:
        raise UsageError("--omega", "simulate takes a single parameter set")
    params = sets[0]
    ext = "bin" if args.stream_format == "binary" else "csv"
    out_dir = _output_dir(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.name or f"stream_seed={args.seed}"

    stream = montecarlo.generate_stream_parallel(params, args.photons, args.seed, workers=args.workers)
    streamio.write_stream(stream, out_dir / f"{stem}.{ext}", args.stream_format)
    summary = {"metadata": _metadata(args, params, seed=args.seed, generator=montecarlo.GENERATOR_NAME),
               "cascade": simulation_summary(stream, args.window)}
    if args.poisson_reference:
        ref = montecarlo.poisson_reference_stream(params, args.photons, args.seed)
        streamio.write_stream(ref, out_dir / f"{stem}_poisson.{ext}", args.stream_format)
        summary["poisson_reference"] = {"n_photons": ref.n_photons,
                                        "mean_delay": float(ref.delays.mean()) if ref.n_photons > 1 else None}
    (out_dir / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="ascii")
    return 0


def cmd_validate(args) -> int:
    if args.inject_fault is not None and args.inject_fault not in validation.CHECKS:
        raise UsageError("--inject-fault", f"unknown check {args.inject_fault!r}")
    results = validation.run_checks(fault=args.inject_fault)
    rep = validation.report(results)
    rep["metadata"] = {"tool": "rfcascade", "version": __version__, "command": "validate",
                       "inject_fault": args.inject_fault}
    text = json.dumps(rep, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: error={r.error:.3e} tol={r.tolerance:.1e}", file=sys.stderr)
    return 0 if rep["passed"] else 1


# -- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfcascade", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rfcascade {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def physics(p, presets=()):
        p.add_argument("--gamma", type=float, default=1.0, help="coherence decay rate (default 1)")
        p.add_argument("--omega", type=float, nargs="+", default=[ROOT2], help="Rabi frequency, one or more")
        p.add_argument("--delta", type=float, nargs="+", default=[0.0], help="detuning, one or more")
        if presets:
            p.add_argument("--preset", choices=presets, help="named group of (omega, delta) pairs at gamma = 1")
        p.add_argument("--output", "-o", help="output file, or directory for several parameter sets")

    def table(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def time_grid(p, tmax):
        p.add_argument("--tmin", type=float, default=0.0)
        p.add_argument("--tmax", type=float, default=None, help=f"default {tmax:g}/gamma")
        p.add_argument("--points", type=int, default=400)
        p.set_defaults(default_tmax=tmax)

    p = sub.add_parser("delay-curve", help="K, P, lambda, Lambda versus delay")
    physics(p, tuple(PRESETS))
    table(p)
    time_grid(p, 8.0)
    p.set_defaults(func=cmd_delay_curve)

    p = sub.add_parser("stats", help="delay moments, Q factor and counting statistics")
    physics(p, tuple(PRESETS))
    p.add_argument("--window", type=float, default=None, help="counting window (default 100 mean delays)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("spectrum", help="intensity noise spectrum 1 + Q(omega)")
    physics(p, tuple(PRESETS))
    table(p)
    p.add_argument("--wmin", type=float, default=1e-2, help="lowest frequency in units of gamma")
    p.add_argument("--wmax", type=float, default=1e2, help="highest frequency in units of gamma")
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--scale", choices=("log", "linear"), default="log")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("correlation", help="normalised photon correlation j(t)")
    physics(p, tuple(PRESETS))
    table(p)
    time_grid(p, 5.0)
    p.add_argument("--resonant", action="store_true", help="add the zero-detuning closed form j0")
    p.add_argument("--perturbative", action="store_true", help="add the weak-excitation form j_pert")
    p.set_defaults(func=cmd_correlation)

    p = sub.add_parser("simulate", help="draw a photon stream and summarise it")
    physics(p)
    p.add_argument("--photons", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=float, default=None, help="counting window (default 100 mean delays)")
    p.add_argument("--stream-format", choices=("binary", "csv"), default="binary")
    p.add_argument("--name", help="file stem (default stream_seed=<seed>)")
    p.add_argument("--poisson-reference", action="store_true", help="also write the matched exponential stream")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run the invariant and oracle checks")
    p.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    p.add_argument("--inject-fault", metavar="CHECK", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rfcascade {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CascadeError as exc:
        print(f"rfcascade {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
