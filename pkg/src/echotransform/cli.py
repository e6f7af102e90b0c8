"""Command-line entry point.

    echotransform design   --config run.yaml
    echotransform compile  design.usd|matrix.txt [--config run.yaml] [layout flags]
    echotransform lint     schedule.sched
    echotransform simulate --config run.yaml [--schedule schedule.sched]
    echotransform sweep    --config run.yaml
    echotransform report   --config run.yaml [--curve rate_curve.csv]

Exit codes: 0 success, 1 domain error, 2 configuration or parse error.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import analysis, compiler, formats, kernel
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, ParseError
from .usd import design_n_states, design_qubit_pair, helstrom_bound, idp_bound, qubit_family

EXIT_DOMAIN = 1
EXIT_CONFIG = 2


class UsageError(Exception):
    pass


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _read(path, what):
    if not os.path.exists(path):
        raise UsageError(f"{what} {path!r} does not exist")
    with open(path) as fh:
        return fh.read()


def _config(args) -> RunConfig:
    if not args.config:
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, trials=args.trials, jitter=args.jitter, out=args.out)


def build_design(cfg: RunConfig):
    if cfg.scenario in ("custom_unitary", "von_neumann"):
        raise ConfigError(f"scenario {cfg.scenario} has no discrimination design")
    if cfg.states is not None:
        return design_n_states(cfg.states, cfg.priors)
    return design_qubit_pair(cfg.alpha)


def _layout(cfg_layout, args):
    lay = cfg_layout
    for flag, name in (("mode_spacing", "mode_spacing"), ("cluster_guard", "cluster_guard"),
                       ("read_delay", "read_delay"), ("max_horizon", "max_horizon")):
        v = getattr(args, flag, None)
        if v is not None:
            lay = dataclasses.replace(lay, **{name: v})
    if getattr(args, "no_t2_compensation", False):
        lay = dataclasses.replace(lay, t2_compensation=None)
    return lay


def _bounds_summary(design) -> list[str]:
    lines = [f"states: {design.n_states}, embedding dimension: {design.dim}, auxiliary modes: {design.aux_dim}",
             "p_inconclusive per state: " + " ".join(f"{q:.10g}" for q in design.p_inconclusive),
             f"p_inconclusive average: {design.p_inconclusive_avg:.10g}"]
    if design.n_states == 2:
        a, b = design.inputs
        lines.append(f"IDP bound: {idp_bound(a, b):.10g}")
        lines.append(f"Helstrom bound: {helstrom_bound(a, b):.10g}")
    return lines


def cmd_design(args) -> int:
    cfg = _config(args)
    design = build_design(cfg)
    path = _write(cfg.out, "design.usd", formats.dump_design(design))
    print("\n".join(_bounds_summary(design)))
    print(f"wrote {path}")
    return 0


def cmd_compile(args) -> int:
    text = _read(args.input, "input file")
    layout = load_config(args.config).layout if args.config else compiler.LayoutParams()
    layout = _layout(layout, args)
    if text.lstrip().startswith(formats.USD_HEADER):
        matrix = formats.load_design(text).transfer_matrix()
        layout = dataclasses.replace(layout, allow_nonunitary=True)
    else:
        matrix = formats.load_matrix(text)
        layout = dataclasses.replace(layout, allow_nonunitary=args.allow_nonunitary)
    sched = compiler.compile(matrix, layout)
    report = compiler.validate(sched)
    out = args.out or "out"
    path = _write(out, "schedule.sched", formats.dump_schedule(sched))
    print(f"{len(sched.train.reads)} read pulses in {len(sched.output_bindings)} clusters")
    print(report.summary())
    print(f"wrote {path}")
    return 0 if report.ok else EXIT_DOMAIN


def cmd_lint(args) -> int:
    sched = formats.load_schedule(_read(args.schedule, "schedule"))
    report = compiler.validate(sched, args.duration)
    print(report.summary())
    return 0 if report.ok else EXIT_DOMAIN


def _scenario_runs(cfg: RunConfig, schedule=None):
    """Schedule plus (label, amplitudes, bindings-builder) for each input."""
    lay = cfg.layout
    if cfg.scenario in ("qubit_usd", "qutrit_usd"):
        design = build_design(cfg)
        sched = schedule or compiler.compile(design.transfer_matrix(), dataclasses.replace(lay, allow_nonunitary=True))
        runs = [(f"state{i}", design.input_amplitudes(i), analysis.usd_bindings(sched, design, i))
                for i in range(design.n_states)]
    elif cfg.scenario == "von_neumann":
        sched = schedule or compiler.compile(analysis.VON_NEUMANN, lay)
        plus, minus = qubit_family(cfg.alpha)
        runs = [(f"state{i}", v.amplitudes[:2], analysis.projective_bindings(sched, i))
                for i, v in enumerate((plus, minus))]
    else:
        sched = schedule or compiler.compile(cfg.matrix, dataclasses.replace(lay, allow_nonunitary=True))
        d = len(sched.input_bindings)
        states = cfg.states or [np.eye(d)[j] for j in range(d)]
        runs = [(f"state{i}", np.asarray(v), [(lab, t, "aux") for lab, t in sched.output_bindings])
                for i, v in enumerate(states)]
    return sched, runs


def cmd_simulate(args) -> int:
    cfg = _config(args)
    schedule = formats.load_schedule(_read(args.schedule, "schedule")) if args.schedule else None
    sched, runs = _scenario_runs(cfg, schedule)
    report = compiler.validate(sched)
    if not report.ok:
        print(report.summary(), file=sys.stderr)
        return EXIT_DOMAIN
    model = cfg.model
    scaling = analysis.cluster_scaling(sched, model)
    bg = analysis.BackgroundModel(cfg.background_offset)
    reports = []
    for r_idx, (label, amps, bindings) in enumerate(runs):
        train = sched.with_input(amps)
        if cfg.kernel == "spectral":
            shot = kernel.apply_phase_jitter(train, model, [cfg.seed, r_idx, 0], sched.mode_spacing)
            trace = kernel.simulate_spectral(shot, model)
            det = analysis.DetectorTrace.of(trace)
        else:
            window = analysis.trace_window(sched)
            shot = kernel.apply_phase_jitter(train, model, [cfg.seed, r_idx, 0], sched.mode_spacing)
            trace, _ = kernel.simulate_abstract(shot, model, window)
            det = analysis.averaged_trace(sched, amps, model, cfg.trials, (cfg.seed, r_idx), window)
        rep = analysis.integrate_areas(det, bindings, cfg.window_half_width, bg, scaling)
        reports.append(rep)
        _write(cfg.out, f"trace_{label}.csv", kernel.trace_to_csv(trace))
        _write(cfg.out, f"areas_{label}.csv", analysis.areas_to_csv(rep))
        print(f"{label}: " + ", ".join(f"{m.label}[{m.role}]={m.normalized_area:.6g}" for m in rep.modes))
    if cfg.scenario != "custom_unitary":
        rates = analysis.compute_rates(*reports)
        print(f"p_e = {rates.p_e:.6g}, p_? = {rates.p_q:.6g}")
    print(f"wrote {len(runs)} trace and area files to {cfg.out}")
    return 0


def _sweep_scenario(cfg):
    if cfg.scenario == "qubit_usd":
        return "both"
    if cfg.scenario == "von_neumann":
        return "von_neumann"
    raise ConfigError(f"sweeps are defined for qubit_usd and von_neumann, not {cfg.scenario}")


def run_sweep(cfg: RunConfig) -> analysis.RateCurve:
    return analysis.sweep_alpha(cfg.alphas, _sweep_scenario(cfg), cfg.model, cfg.seed, cfg.trials,
                                cfg.layout, cfg.window_half_width,
                                analysis.BackgroundModel(cfg.background_offset))


def cmd_sweep(args) -> int:
    cfg = _config(args)
    curve = run_sweep(cfg)
    _write(cfg.out, "rate_curve.csv", analysis.curve_to_csv(curve))
    _write(cfg.out, "rate_curve.dat", analysis.curve_to_plotdata(curve))
    print(f"{'alpha':>8} {'overlap':>8} {'p_e_vn':>9} {'p_e_usd':>9} {'p_q_usd':>9} {'helstrom':>9} {'idp':>9}")
    for p in curve.points:
        print(" ".join(f"{x:9.5f}" for x in p.row()))
    print(f"wrote {os.path.join(cfg.out, 'rate_curve.csv')}")
    return 0


def compare_to_bounds(curve: analysis.RateCurve, tol: dict) -> tuple[list[str], bool]:
    lines = [f"{'alpha':>8} {'check':<26} {'measured':>12} {'bound':>12} {'|diff|':>10} result"]
    ok = True

    def row(alpha, name, value, bound, limit):
        nonlocal ok
        if np.isnan(value):
            return
        diff = abs(value - bound)
        good = diff <= limit
        ok &= good
        lines.append(f"{alpha:8.4f} {name:<26} {value:12.6g} {bound:12.6g} {diff:10.3g} "
                     f"{'PASS' if good else 'FAIL'} (tol {limit:g})")

    for p in curve.points:
        row(p.alpha, "p_e_usd vs 0", p.p_e_usd, 0.0, tol["p_e_usd"])
        row(p.alpha, "p_q_usd vs IDP", p.p_q_usd, p.idp, tol["p_q_usd"])
        row(p.alpha, "p_e_vn vs Helstrom", p.p_e_vn, p.helstrom, tol["p_e_vn"])
    lines.append("ALL POINTS WITHIN TOLERANCE" if ok else "SOME POINTS OUTSIDE TOLERANCE")
    return lines, ok


def cmd_report(args) -> int:
    cfg = _config(args)
    path = args.curve or os.path.join(cfg.out, "rate_curve.csv")
    if os.path.exists(path):
        with open(path) as fh:
            curve = analysis.curve_from_csv(fh.read(), cfg.trials)
    elif args.curve:
        raise UsageError(f"rate curve {path!r} does not exist")
    else:
        curve = run_sweep(cfg)
        _write(cfg.out, "rate_curve.csv", analysis.curve_to_csv(curve))
    lines, ok = compare_to_bounds(curve, cfg.tolerances)
    header = [f"config: {cfg.source}", f"scenario: {cfg.scenario}",
              f"jitter sigma: {cfg.model.phase_jitter_sigma:g} rad, trials: {cfg.trials}, seed: {cfg.seed}", ""]
    text = "\n".join(header + lines) + "\n"
    _write(cfg.out, "report.txt", text)
    print(text, end="")
    return EXIT_DOMAIN if (args.strict and not ok) else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--trials", type=int, help="jitter trials per input")
    common.add_argument("--jitter", help="read-phase jitter sigma in rad, or 'calibrated'")

    p = argparse.ArgumentParser(prog="echotransform", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="write an ECHO-USD design").set_defaults(fn=cmd_design)

    c = sub.add_parser("compile", parents=[common], help="compile a design or matrix into a schedule")
    c.add_argument("input", help="ECHO-USD file or plain matrix file")
    c.add_argument("--mode-spacing", type=float)
    c.add_argument("--cluster-guard", type=float)
    c.add_argument("--read-delay", type=float)
    c.add_argument("--max-horizon", type=int)
    c.add_argument("--no-t2-compensation", action="store_true")
    c.add_argument("--allow-nonunitary", action="store_true")
    c.set_defaults(fn=cmd_compile)

    lint = sub.add_parser("lint", help="check a schedule for echo collisions")
    lint.add_argument("schedule")
    lint.add_argument("--duration", type=float, help="collision window in ns (default: pulse duration)")
    lint.set_defaults(fn=cmd_lint)

    s = sub.add_parser("simulate", parents=[common], help="simulate traces and areas")
    s.add_argument("--schedule", help="ECHO-SCHED file (default: compile from the config)")
    s.set_defaults(fn=cmd_simulate)

    sub.add_parser("sweep", parents=[common], help="alpha sweep of rates").set_defaults(fn=cmd_sweep)

    r = sub.add_parser("report", parents=[common], help="compare rates with the bounds")
    r.add_argument("--curve", help="rate curve CSV (default: <out>/rate_curve.csv, swept if absent)")
    r.add_argument("--strict", action="store_true", help="exit 1 when a point is out of tolerance")
    r.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
