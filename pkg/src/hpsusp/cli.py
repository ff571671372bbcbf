"""Command-line interface.

Subcommands: simulate, estimate, build-table, wheel-load, bench, validate.
Exit codes: 0 success, 2 usage error, 3 input-format error, 4 numerical
failure, 5 validation-suite failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings


from . import config, estimator, io, lookup, metrics, oracle, validate, wheel

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_VALIDATION = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code at 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(ValueError):
    pass


def _load_config(args) -> config.RunConfig:
    if getattr(args, "config", None):
        return config.load_run_config(args.config)
    return config.preset(args.preset, t0=getattr(args, "t0", 30.0))


def _add_config_flags(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", default="bench-prototype",
                   choices=config.PRESET_NAMES, help="named base configuration")
    p.add_argument("--t0", type=float, default=30.0,
                   help="oil/gas operating temperature, degC")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if args.duration is not None and args.duration <= 0.0:
        raise UsageError("--duration must be positive")
    duration = args.duration if args.duration is not None else 20.0 / args.freq
    if args.quarter_car:
        road = oracle.Excitation(kind=args.kind, amplitudes=(args.amp,),
                                 frequencies=(args.freq,), duration=duration,
                                 offset=args.offset)
        trace = oracle.simulate_quarter_car(road, cfg.quarter_car, args.dt)
    else:
        exc = oracle.Excitation(kind=args.kind, amplitudes=(args.amp,),
                                frequencies=(args.freq,), duration=duration,
                                offset=args.offset)
        trace = oracle.simulate_suspension(exc, cfg.suspension, args.dt)
    io.write_trace_csv(args.out, trace)
    print(f"wrote {trace.p1.size} samples at dt={trace.dt:g} s to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    trace, truth = io.read_trace_csv(args.trace, t0_temperature=args.t0)
    if args.mode == "lookup":
        if not args.table:
            raise UsageError("lookup mode requires --table")
        table = lookup.load_table(args.table, cfg.suspension)
        omega = "auto" if args.omega == "auto" else float(args.omega)
        est = lookup.estimate_series(trace, table, omega=omega)
        f_out, v = est.f_out, est.v
        bd = None
    else:
        bd = estimator.run(trace, cfg.suspension)
        f_out, v = bd.f_out, bd.v
        io.write_breakdown_csv(args.out, trace, bd)
    if args.mode == "lookup":
        # lookup yields no full breakdown; emit the triplet as a trace-like CSV
        t = trace.t
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("t_s,f_out_n,v_mps,h_m\n")
            for row in zip(t, est.f_out, est.v, est.h):
                fh.write(",".join("%.17g" % x for x in row) + "\n")
    print(f"wrote {args.out}")
    if "f_out_truth_n" in truth:
        rel = metrics.rel_rmse(f_out, truth["f_out_truth_n"])
        r2 = metrics.r_squared(f_out, truth["f_out_truth_n"])
        print(f"vs embedded truth: rel RMSE {rel:.3%}, R2 {r2:.4f}")
    return EXIT_OK


def cmd_build_table(args) -> int:
    cfg = _load_config(args)
    settings = cfg.table
    if args.frequencies:
        freqs = tuple(float(f) for f in args.frequencies.split(","))
        settings = config.TableBuildSettings(
            frequencies_hz=freqs, dt=settings.dt,
            n_amplitudes=settings.n_amplitudes,
            amplitude_scale=settings.amplitude_scale,
            static_force_n=settings.static_force_n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = lookup.build_table(cfg.suspension, settings)
    lookup.save_table(table, args.out)
    cov = ", ".join(f"{f:g} Hz {g.coverage:.0%}"
                    for f, g in zip(table.frequencies_hz, table.grids))
    print(f"wrote {args.out}: {len(table.grids)} grids, coverage {cov}")
    return EXIT_OK


def cmd_wheel_load(args) -> int:
    cfg = _load_config(args)
    trace, truth = io.read_trace_csv(args.trace, t0_temperature=args.t0)
    table = lookup.load_table(args.table, cfg.suspension)
    omega = "auto" if args.omega == "auto" else float(args.omega)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", wheel.WheelLiftoffWarning)
        series = wheel.estimate_wheel_load_series(trace, table, cfg.linkage,
                                                  omega=omega)
    io.write_wheel_load_csv(args.out, trace.dt, series)
    print(f"wrote {args.out}: {series.f_tire.size} samples, "
          f"{series.liftoff_count} liftoff sample(s)")
    if "f_tire_truth_n" in truth:
        rel = metrics.rel_rmse_mean(series.f_tire, truth["f_tire_truth_n"])
        print(f"vs embedded truth: rel RMSE {rel:.3%} of mean load")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    table = lookup.load_table(args.table, cfg.suspension)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = lookup.benchmark(table, cfg.suspension,
                               n_samples=args.samples, repeats=args.repeats)
    print(f"iterative: {rep['iterative_us_per_sample']:.3f} us/sample")
    print(f"lookup:    {rep['lookup_us_per_sample']:.3f} us/sample")
    print(f"speedup:   {rep['speedup']:.1f}x "
          f"({rep['n_samples']} samples, median of {rep['repeats']})")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2)
        print(f"wrote {args.json}")
    return EXIT_OK


def cmd_validate(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = validate.run_all()
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_VALIDATION


def build_parser() -> _Parser:
    parser = _Parser(prog="hpsusp",
                     description="Hydro-pneumatic suspension force and "
                                 "wheel-load estimation from gas pressure")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward oracle run -> trace CSV")
    _add_config_flags(p)
    p.add_argument("--kind", default="sinusoid",
                   choices=("sinusoid", "sum-of-sines", "linear-sweep"))
    p.add_argument("--freq", type=float, required=True, help="Hz")
    p.add_argument("--amp", type=float, required=True, help="m")
    p.add_argument("--duration", type=float, help="s (default: 20 cycles)")
    p.add_argument("--offset", type=float, default=0.0, help="m")
    p.add_argument("--dt", type=float, default=1.0 / 360.0, help="s")
    p.add_argument("--quarter-car", action="store_true",
                   help="treat the excitation as road input to the quarter car")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="trace CSV -> force estimate CSV")
    _add_config_flags(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--mode", default="iterative", choices=("iterative", "lookup"))
    p.add_argument("--table", help="table file (lookup mode)")
    p.add_argument("--omega", default="auto",
                   help="blend frequency in rad/s, or 'auto'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("build-table", help="offline lookup-table generation")
    _add_config_flags(p)
    p.add_argument("--frequencies", help="comma-separated Hz list override")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_table)

    p = sub.add_parser("wheel-load", help="trace CSV + table -> wheel-load CSV")
    _add_config_flags(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--omega", default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_wheel_load)

    p = sub.add_parser("bench", help="iterative vs lookup timing report")
    _add_config_flags(p)
    p.add_argument("--table", required=True)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--repeats", type=int, default=11)
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="run the full validation campaign")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.CsvFormatError, lookup.TableFormatError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (oracle.StrokeError, oracle.InstabilityError,
            estimator.NoDominantFrequencyError, lookup.TableCoverageError,
            lookup.TimeBaseError, wheel.GeometrySingularityError,
            ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
