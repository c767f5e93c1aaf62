"""Command-line entry point: ``omnidrive <subcommand> [options]``.

Exit status is 0 on success, 1 for invalid input or usage, 2 for I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation, formats, pipeline
from .calibrator import TrainConfig, extract_samples, train_all
from .controller import LIGHTWEIGHT, MODES, PHYSICAL, delta_omega_bound
from .kinematics import Twist, WheelSpeeds, forward_kinematics, inverse_kinematics, slip_residual
from .scurve import evaluate, saturation_time
from .simulator import SimConfig, circle_script, run_script, square_script
from .synthetic import SyntheticTruthSpec, default_commands, diagonal_commands, gen_synthetic

log = logging.getLogger("omnidrive")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"{what} must be {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ValueError(f"{what} must have {n} components, got {len(vals)}")
    return vals


def _g(x: float) -> str:
    return f"{x:.12g}"


def _load_cfg(args) -> formats.RunConfig:
    cfg = formats.load_config(args.config) if args.config else formats.RunConfig()
    if args.mode:
        cfg.sim = SimConfig(mode=args.mode, dt=None, wheel_lag_tau=cfg.sim.wheel_lag_tau,
                            wheel_noise_sigma=cfg.sim.wheel_noise_sigma, seed=cfg.sim.seed)
    return cfg


def _path(arg, cfg, key, what):
    if arg is not None:
        return Path(arg)
    if key in cfg.paths:
        return cfg.paths[key]
    raise ValueError(f"no {what} given (use the option or set '{key}' in the config)")


def _seed(args, default):
    return default if args.seed is None else args.seed


# ----------------------------------------------------------------------------


def cmd_kinematics(args, cfg, out):
    geom = cfg.geometry
    if (args.twist is None) == (args.wheels is None):
        raise ValueError("give exactly one of --twist or --wheels")
    if args.twist is not None:
        w = inverse_kinematics(geom, Twist(*_floats(args.twist, 3, "--twist")))
        print(",".join(_g(v) for v in w), file=out)
    else:
        w = WheelSpeeds(*_floats(args.wheels, 4, "--wheels"))
        t = forward_kinematics(geom, w)
        print(",".join(_g(v) for v in t), file=out)
        print(f"slip_residual={_g(slip_residual(geom, w))}", file=out)
    return EXIT_OK


def cmd_synth(args, cfg, out):
    geom = cfg.geometry
    seed = _seed(args, 0)
    spec = SyntheticTruthSpec(noise_sigma=args.noise, repeats=args.repeats)
    out_dir = _path(args.out, cfg, "profiles", "output directory")
    cmds = default_commands(args.duration, args.n)
    paths = gen_synthetic(spec, cmds, geom, seed, out_dir, args.dt)
    print(f"wrote {len(paths)} training profiles to {out_dir}", file=out)
    if args.diagonal:
        dpaths = gen_synthetic(spec, diagonal_commands(args.duration, args.n), geom, seed + 1,
                               args.diagonal, args.dt)
        paths += dpaths
        print(f"wrote {len(dpaths)} evaluation-only x-y profiles to {args.diagonal}", file=out)
    if args.traces:
        for p in paths:
            rec = formats.load_profile(p)
            formats.write_trace(Path(args.traces) / (p.stem + ".trace.csv"), pipeline.reference_trace(rec, geom))
        print(f"wrote {len(paths)} reference traces to {args.traces}", file=out)
    return EXIT_OK


def _load_profiles(directory: Path):
    files = sorted(Path(directory).glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no profile files in {directory}")
    return [formats.load_profile(p) for p in files]


def cmd_fit(args, cfg, out):
    geom = cfg.geometry
    prof_dir = _path(args.profiles, cfg, "profiles", "profile directory")
    model_path = _path(args.model, cfg, "model", "model output path")
    recs = _load_profiles(prof_dir)
    samples = [s for r in recs for s in extract_samples(r, geom)]
    if not samples:
        raise ValueError("no usable training samples in the recordings")
    tc = cfg.train
    tcfg = TrainConfig(
        seeds=args.seeds if args.seeds is not None else tc.seeds,
        epochs=args.epochs if args.epochs is not None else tc.epochs,
        lr=args.lr if args.lr is not None else tc.lr,
        beta1=tc.beta1, beta2=tc.beta2, eps=tc.eps,
        val_fraction=args.val_fraction if args.val_fraction is not None else tc.val_fraction,
        seed_base=_seed(args, tc.seed_base),
    )
    result = train_all(samples, tcfg)
    formats.write_model(model_path, result.best)
    formats.write_fit_runs(formats.runs_path(model_path), result)
    done = [r for r in result.runs if r.completed]
    print(f"trained {len(done)}/{len(result.runs)} seeds on {len(samples)} samples "
          f"({len(result.train_targets)} train / {len(result.val_targets)} validation targets)", file=out)
    print(f"best seed {result.best.seed}: train loss {result.best.train_loss:.6g}, "
          f"validation loss {result.best.val_loss:.6g}", file=out)
    print(f"model written to {model_path}", file=out)

    if args.plots:
        from .plotting import emit_plot

        plots = Path(args.plots)
        # recorded vs fitted curve for the median-target recording
        rec_samples = [(r, extract_samples(r, geom)) for r in recs]
        rec_samples = [(r, s) for r, s in rec_samples if s]
        rec, ss = rec_samples[len(rec_samples) // 2]
        s = ss[0]
        curve = result.best.predict_curve(s.target)
        emit_plot({"recorded": (s.times, s.values), "fitted S-curve": (s.times, evaluate(curve, s.times))},
                  plots / "fit_overlay", "time since onset [s]", "wheel speed [rad/s]",
                  f"command {tuple(rec.command)}")
        t = np.linspace(0, 4, 241)
        targets = np.linspace(min(result.train_targets), max(result.train_targets), 8)
        family = {f"{dw:.2f} rad/s": (t, evaluate(result.best.predict_curve(dw), t)) for dw in targets}
        emit_plot(family, plots / "predicted_family", "time [s]", "wheel speed [rad/s]", "predicted S-curves")
        print(f"plots written to {plots}", file=out)
    return EXIT_OK


def cmd_predict(args, cfg, out):
    model = formats.load_model(_path(args.model, cfg, "model", "model file"))
    if args.delta_omega is not None:
        dw = args.delta_omega
    elif args.to is not None:
        T0 = Twist(*_floats(args.from_, 3, "--from")) if args.from_ else Twist()
        T1 = Twist(*_floats(args.to, 3, "--to"))
        dw = delta_omega_bound(cfg.geometry, T0, T1)
    else:
        raise ValueError("give --delta-omega or --to (optionally with --from)")
    p = model.predict_curve(dw)
    for name in ("a", "b", "m", "k1", "k2", "delta_omega"):
        print(f"{name} = {getattr(p, name):.10g}", file=out)
    print(f"t99 = {saturation_time(p, 0.99):.6g}", file=out)
    if args.plot:
        from .plotting import emit_plot

        t = np.linspace(0, args.horizon, 400)
        emit_plot({f"S(t), delta_omega={dw:.4g}": (t, evaluate(p, t))}, args.plot,
                  "time [s]", "wheel speed [rad/s]", "predicted S-curve")
    return EXIT_OK


def cmd_simulate(args, cfg, out):
    geom = cfg.geometry
    if args.script in ("square", "circle"):
        script = square_script() if args.script == "square" else circle_script()
    else:
        script = formats.load_script(_path(args.script, cfg, "script", "command script"))
    if args.instant:
        model = None
    else:
        model = formats.load_model(_path(args.model, cfg, "model", "model file (or --instant)"))
    sim = cfg.sim
    sim_cfg = SimConfig(mode=sim.mode, dt=args.dt if args.dt else sim.dt,
                        wheel_lag_tau=args.tau if args.tau is not None else sim.wheel_lag_tau,
                        wheel_noise_sigma=args.noise_sigma if args.noise_sigma is not None else sim.wheel_noise_sigma,
                        seed=_seed(args, sim.seed))
    trace = run_script(script, geom, model, sim_cfg)
    dest = _path(args.out, cfg, "output", "trace output path")
    formats.write_trace(dest, trace)
    x, y, th = trace.pose[-1]
    print(f"{sim_cfg.mode} run: {len(trace)} samples, final pose x={x:.6g} y={y:.6g} theta={th:.6g}", file=out)
    print(f"trace written to {dest}", file=out)
    if args.plot:
        from .plotting import emit_plot

        emit_plot({sim_cfg.mode: (trace.pose[:, 0], trace.pose[:, 1])}, args.plot, "x [m]", "y [m]",
                  "simulated trajectory", equal_axes=True)
    return EXIT_OK


def _read_pairs(path: Path):
    pairs = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#") or row[0] == "real":
                continue
            if len(row) != 4:
                raise formats.ColumnCountError(path, lineno, "expected real,sim,category,kind")
            real, sim, category, kind = (c.strip() for c in row)
            base = path.parent
            pairs.append((formats.load_trace(base / real), formats.load_trace(base / sim), category, kind))
    return pairs


def cmd_eval(args, cfg, out):
    geom = cfg.geometry
    if args.profiles:
        model = None if args.instant else formats.load_model(_path(args.model, cfg, "model", "model file"))
        recs = [r for d in args.profiles for r in _load_profiles(Path(d))]
        modes = [args.mode] if args.mode else [PHYSICAL, LIGHTWEIGHT]
        reports = {}
        for mode in modes:
            label = "% Value" if mode == PHYSICAL else "% Value (Light)"
            reports[label] = pipeline.error_report(recs, geom, model, SimConfig(mode=mode))
    else:
        if args.pairs:
            pairs = _read_pairs(Path(args.pairs))
        elif args.real and args.sim:
            pairs = [(formats.load_trace(args.real), formats.load_trace(args.sim), args.category, args.kind)]
        else:
            raise ValueError("give --real and --sim, --pairs, or --profiles")
        reports = {args.label: evaluation.summarize(pairs)}
    print(evaluation.format_table(reports), end="", file=out)
    if args.out:
        formats.atomic_write(args.out, evaluation.table_csv(reports))
        print(f"report written to {args.out}", file=out)
    return EXIT_OK


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="run configuration file (key = value)")
    common.add_argument("--seed", type=int, help="seed for every randomised stage")
    common.add_argument("--mode", choices=MODES, help="drive simulation mode")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="omnidrive", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kinematics", parents=[common], help="twist <-> wheel speed conversion")
    p.add_argument("--twist", help="vx,vy,wz")
    p.add_argument("--wheels", help="w1,w2,w3,w4")
    p.set_defaults(func=cmd_kinematics)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic profile recordings")
    p.add_argument("--out", help="directory for training profiles")
    p.add_argument("--diagonal", help="also write evaluation-only x-y profiles here")
    p.add_argument("--traces", help="also write dead-reckoned reference traces here")
    p.add_argument("--noise", type=float, default=0.02, help="noise sigma as a fraction of target")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--n", type=int, default=20, help="targets per axis")
    p.add_argument("--duration", type=float, default=4.0)
    p.add_argument("--dt", type=float, default=1.0 / 60.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", parents=[common], help="train the S-curve model")
    p.add_argument("--profiles", help="directory of profile files")
    p.add_argument("--model", help="model output file")
    p.add_argument("--seeds", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--plots", help="directory for fit plots")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="report the S-curve for a velocity change")
    p.add_argument("--model", help="model file")
    p.add_argument("--delta-omega", type=float)
    p.add_argument("--from", dest="from_", help="current twist vx,vy,wz (default rest)")
    p.add_argument("--to", help="target twist vx,vy,wz")
    p.add_argument("--plot", help="SVG output path")
    p.add_argument("--horizon", type=float, default=4.0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", parents=[common], help="run a command script open-loop")
    p.add_argument("--script", help="script file, or 'square' / 'circle'")
    p.add_argument("--model", help="model file")
    p.add_argument("--instant", action="store_true", help="instantaneous transitions, no model")
    p.add_argument("--out", help="trace output file")
    p.add_argument("--dt", type=float)
    p.add_argument("--tau", type=float, help="wheel lag time constant [s] (physical mode)")
    p.add_argument("--noise-sigma", type=float, help="wheel noise [rad/s] (physical mode)")
    p.add_argument("--plot", help="SVG output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", parents=[common], help="relative-error report")
    p.add_argument("--real", help="reference trace")
    p.add_argument("--sim", help="simulated trace")
    p.add_argument("--category", default="x")
    p.add_argument("--kind", choices=evaluation.KINDS, default=evaluation.LINEAR)
    p.add_argument("--pairs", help="CSV of real,sim,category,kind (paths relative to the file)")
    p.add_argument("--profiles", nargs="+", help="recording directories to replay against the model")
    p.add_argument("--model", help="model file (with --profiles)")
    p.add_argument("--instant", action="store_true")
    p.add_argument("--label", default="% Value")
    p.add_argument("--out", help="CSV report path")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_cfg(args)
        return args.func(args, cfg, out)
    except (OSError,) as exc:
        print(f"omnidrive: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"omnidrive: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
