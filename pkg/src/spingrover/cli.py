"""Command-line front end: validate, compile, run, sweep, fit.

Everything is driven by one YAML config (see README for the schema) plus
``--set section.key=value`` overrides.  Exit codes: 0 success, 1 usage or
config error, 2 spectrum validation failure, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import sys

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .engines import basis_vector, run_program
from .experiments import (
    FitError,
    fit_decay,
    reference_trajectory,
    sweep_amplitudes,
)
from .grover_compiler import RegisterLayout, compile_grover
from .noise_model import sample_realization
from .spin_model import BasisState, transition_frequency, valid_contexts, validate_spectrum

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _program(cfg: RunConfig):
    layout = RegisterLayout(cfg.system.n_spins)
    return layout, compile_grover(cfg.system, layout, BasisState(cfg.target), cfg.rabi)


def cmd_validate(cfg: RunConfig, args) -> int:
    print("# transition table: qubit mu nu frequency")
    for k in range(cfg.system.n_spins):
        for lab in valid_contexts(cfg.system, k):
            print(f"{lab.qubit} {lab.mu} {lab.nu} {_fmt(transition_frequency(cfg.system, lab))}")
    collisions = validate_spectrum(cfg.system, args.tolerance)
    print(f"# collisions (tolerance {_fmt(args.tolerance)}): {len(collisions)}")
    for a, b in collisions:
        print(
            f"collision ({a.qubit},{a.mu},{a.nu}) ~ ({b.qubit},{b.mu},{b.nu}): "
            f"{_fmt(transition_frequency(cfg.system, a))} vs "
            f"{_fmt(transition_frequency(cfg.system, b))}"
        )
    return EXIT_OK if not collisions else EXIT_VALIDATION


def cmd_compile(cfg: RunConfig, args) -> int:
    _, program = _program(cfg)
    text = program.dump()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def cmd_run(cfg: RunConfig, args) -> int:
    _, program = _program(cfg)
    initial = basis_vector(cfg.system.n_spins, 0)
    ref = reference_trajectory(cfg.system, program, cfg.engine, initial,
                               cfg.trace_reference_mode)
    noise = None
    if cfg.noise.amplitude > 0:
        noise = sample_realization(cfg.noise, args.repetition, len(program),
                                   cfg.system.n_spins)
    traj = run_program(cfg.engine, cfg.system, program, initial, noise=noise)
    curve = traj.fidelity_curve(ref)
    labels = ["initial"] + traj.labels
    if cfg.trace_path:
        rows = [
            (i, t, f, lab)
            for i, (t, f, lab) in enumerate(zip(traj.times_tph, curve, labels))
        ]
        _write_csv(cfg.trace_path, ["pulse_index", "time_tph", "fidelity", "gate_label"], rows)
        print(f"wrote {cfg.trace_path} ({len(rows)} rows)")
    if cfg.plot_script_path:
        _write_trace_plot_script(cfg.plot_script_path, cfg.trace_path)
    print(f"final fidelity {_fmt(curve[-1])} vs {cfg.trace_reference_mode}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    _, program = _program(cfg)
    amplitudes = cfg.amplitudes or (cfg.noise.amplitude,)
    rows = sweep_amplitudes(
        cfg.system, program, cfg.engine, cfg.noise, amplitudes, cfg.n_rep,
        reference_mode=cfg.reference_mode, p_groups=cfg.p_groups,
        max_workers=cfg.threads,
    )
    _write_csv(cfg.sweep_path, ["epsilon", "f_end", "sigma", "n_rep"], rows)
    print(f"wrote {cfg.sweep_path} ({len(rows)} rows)")
    if cfg.plot_script_path:
        _write_sweep_plot_script(cfg.plot_script_path, cfg.sweep_path, cfg.fit_path)
    return EXIT_OK


def cmd_fit(cfg: RunConfig, args) -> int:
    path = args.input or cfg.sweep_path
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        points = [
            (float(r["epsilon"]), float(r["f_end"]), float(r["sigma"]) or 1e-4)
            for r in reader
        ]
    model = args.model or cfg.fit_model
    try:
        result = fit_decay(points, model)
    except FitError as exc:
        print(f"fit did not converge: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    header = ["model", "baseline", "eps2", "eps1",
              "sigma_baseline", "sigma_eps2", "sigma_eps1", "chi2_reduced"]
    row = [result.model, *result.params, *result.sigmas, result.chi2_reduced]
    _write_csv(cfg.fit_path, header, [row])
    print(f"wrote {cfg.fit_path}")
    print(
        f"{result.model}: baseline={_fmt(result.params[0])} "
        f"eps2={_fmt(result.params[1])} eps1={_fmt(result.params[2])} "
        f"chi2_red={_fmt(result.chi2_reduced)}"
    )
    return EXIT_OK


_TRACE_PLOT = """\
# fidelity-vs-time plot for a trace CSV (run with: python3 <this file>)
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({trace!r})))
t = [float(r["time_tph"]) for r in rows]
f = [float(r["fidelity"]) for r in rows]
plt.plot(t, f, lw=1)
for r0, r1 in zip(rows, rows[1:]):
    color = {{"conditional_reflection": "green"}}.get(r1["gate_label"])
    if r1["gate_label"].startswith("oracle("):
        color = "red"
    if color:
        plt.axvspan(float(r0["time_tph"]), float(r1["time_tph"]), color=color, alpha=0.3, lw=0)
plt.xlabel("time [pi/2-pulse durations]")
plt.ylabel("fidelity")
plt.savefig("trace.png", dpi=150)
"""

_SWEEP_PLOT = """\
# final fidelity vs noise amplitude, with optional fitted curve
import csv
import math
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({sweep!r})))
e = [float(r["epsilon"]) for r in rows]
f = [float(r["f_end"]) for r in rows]
s = [float(r["sigma"]) for r in rows]
plt.errorbar(e, f, yerr=s, fmt="o")
try:
    fit = next(iter(csv.DictReader(open({fit!r}))))
    b, e2, e1 = (float(fit[k]) for k in ("baseline", "eps2", "eps1"))
    xs = [max(e) * i / 200 for i in range(201)]
    if fit["model"] == "exp_gauss":
        ys = [b + (1 - b) * math.exp(-((x / e2) ** 2) - x / e1) for x in xs]
    else:
        ys = [b + (1 - b) / math.sqrt((x / e2) ** 2 + x / e1 + 1) for x in xs]
    plt.plot(xs, ys, "-")
except (OSError, StopIteration):
    pass
plt.xlabel("noise amplitude")
plt.ylabel("final fidelity")
plt.savefig("sweep.png", dpi=150)
"""


def _write_trace_plot_script(path: str, trace: str) -> None:
    with open(path, "w") as fh:
        fh.write(_TRACE_PLOT.format(trace=trace))


def _write_sweep_plot_script(path: str, sweep: str, fit: str) -> None:
    with open(path, "w") as fh:
        fh.write(_SWEEP_PLOT.format(sweep=sweep, fit=fit))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spingrover",
        description="Pulse-level Grover search simulator on an Ising spin chain",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", required=True, help="YAML config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config field (dotted path)")

    p = sub.add_parser("validate", help="check the register spectrum for collisions")
    common(p)
    p.add_argument("--tolerance", type=float, default=1.0,
                   help="collision tolerance in frequency units (default 1.0)")

    p = sub.add_parser("compile", help="dump the compiled pulse program")
    common(p)
    p.add_argument("-o", "--output", help="write the table here instead of stdout")

    p = sub.add_parser("run", help="single execution with a fidelity trace")
    common(p)
    p.add_argument("--repetition", type=int, default=0,
                   help="noise repetition index (default 0)")

    p = sub.add_parser("sweep", help="ensemble sweep over noise amplitudes")
    common(p)

    p = sub.add_parser("fit", help="fit a decay model to a sweep CSV")
    common(p)
    p.add_argument("--input", help="sweep CSV (default: output.sweep from config)")
    p.add_argument("--model", choices=("exp_gauss", "algebraic"),
                   help="decay model (default: output.fit_model from config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {
        "validate": cmd_validate,
        "compile": cmd_compile,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "fit": cmd_fit,
    }[args.command]
    try:
        return handler(cfg, args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
