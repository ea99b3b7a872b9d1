"""Command-line entry point.

Data goes to stdout (or --out); messages go to stderr. Exit codes: 0 success,
2 invalid input or refused oracle, 3 promise violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import adversary, experiments, photonics, protocol, satgen

EXIT_OK, EXIT_INVALID, EXIT_PROMISE = 0, 2, 3


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(text: str, args, name: str) -> None:
    out = args.out
    if out is None and getattr(args, "output_dir", None):
        out = str(Path(args.output_dir) / f"{name}.{args.format}")
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        _log(f"wrote {out}")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _params(args) -> protocol.ProtocolParams:
    return protocol.ProtocolParams.build(args.n, args.mu, args.nu, args.dark, m=args.m,
                                         delta=args.delta, gamma=args.gamma)


def _grid(spec: str) -> list[float]:
    """'a,b,c' or 'start:stop:count' (inclusive, evenly spaced)."""
    if ":" in spec:
        lo, hi, k = spec.split(":")
        return [float(x) for x in np.linspace(float(lo), float(hi), int(k))]
    return [float(x) for x in spec.split(",") if x.strip()]


# -- commands ------------------------------------------------------------------

def cmd_gen_instance(args):
    f = satgen.gen_balanced_planted(args.n, args.degree, seed=args.seed, delta=args.delta)
    _log(f"M={f.m} balanced={f.is_balanced()} (every variable in {f.degree} clauses)")
    text = satgen.serialize(f)
    if args.out is None:
        sys.stdout.write(text)
    else:
        satgen.write_formula(f, args.out)
        _log(f"wrote {args.out}")


def cmd_analyze(args):
    p = _params(args)
    b = protocol.analytic_bounds(p)
    d = b.to_dict()
    d["advantage"] = protocol.advantage_report(p)
    d["expected_clicks"] = protocol.expected_clicks(p)
    sys.stdout.write(_json(d))


def cmd_mu_window(args):
    w = protocol.mu_window(args.n, args.nu, args.delta, args.m, (args.c_min, args.s_max),
                           p_dark=args.dark, mu_max=args.mu_max)
    if w is None:
        _log("no mean photon number meets the targets")
    sys.stdout.write(_json({"mu_min": w[0] if w else None, "mu_max": w[1] if w else None,
                            "empty": w is None}))


def cmd_run(args):
    p = _params(args)
    f = None
    if args.mode == experiments.INSTANCE:
        if args.instance:
            f = satgen.read_formula(args.instance)
        else:
            f = satgen.gen_balanced_planted(args.n, args.degree, seed=args.seed, delta=args.delta)
    reports = [experiments.run_trial(p, args.mode, experiments.derive_seed(args.seed, args.n, t), f)
               for t in range(args.trials)]
    _emit(experiments.reports_to_json(reports), args, "run")


def cmd_soundness(args):
    f = satgen.read_formula(args.instance)
    payload = None
    if args.assignment:
        payload = np.frombuffer(args.assignment.encode(), dtype=np.uint8) - ord("0")
    strat = adversary.AdversaryStrategy(args.strategy, payload)
    p = protocol.ProtocolParams.build(f.n, args.mu, args.nu, args.dark, m=f.m,
                                      delta=f.delta or args.delta, gamma=args.gamma)
    reports = [experiments.adversary_trial(f, strat, p, experiments.derive_seed(args.seed, f.n, t))
               for t in range(args.trials)]
    acc = sum(r.verdict for r in reports) / len(reports)
    _log(f"acceptance {acc:.4f} vs soundness bound {reports[0].soundness_ub:.4g}")
    _emit(experiments.reports_to_json(reports), args, "soundness")


def _sweep(args, axis, grid):
    p = _params(args)
    spec = experiments.SweepSpec(axis=axis, grid=grid, fixed=p, trials=args.trials,
                                 seed=args.seed, mode=args.mode)
    rows = experiments.sweep(spec)
    if args.format == "json":
        text = _json([r.__dict__ for r in rows])
    else:
        text = experiments.rows_to_csv(rows)
    _emit(text, args, f"sweep_{axis}")


def cmd_sweep_mu(args):
    _sweep(args, "mu", _grid(args.grid))


def cmd_sweep_n(args):
    _sweep(args, "n", _grid(args.grid))


def cmd_classical_cost(args):
    if args.missing is not None:
        if args.missing < 0:
            raise ValueError("--missing must be >= 0")
        missing, log2_ops = protocol.classical_cost(args.missing, 0, args.gamma)
    else:
        if args.n is None or args.s_clk is None:
            raise ValueError("give --missing, or both --n and --s-clk")
        missing, log2_ops = protocol.classical_cost(args.n, args.s_clk, args.gamma)
    ops = 2.0**log2_ops if log2_ops < 1024 else math.inf
    _log(f"{missing} missing bits -> about {ops:.3g} operations")
    sys.stdout.write(_json({"missing_bits": missing, "gamma": args.gamma, "log2_ops": log2_ops,
                            "ops": ops if math.isfinite(ops) else None,
                            "log10_ops": log2_ops * math.log10(2)}))


def cmd_delta(args):
    f = satgen.read_formula(args.instance)
    d = satgen.brute_force_delta(f)
    sys.stdout.write(_json({"n": f.n, "m": f.m, "delta": d, "satisfiable": d == 0}))


def cmd_table1(args):
    rows = experiments.table1_replication(trials=args.trials, seed=args.seed, delta=args.delta)
    if args.format == "json":
        text = _json([r.__dict__ for r in rows])
    else:
        text = experiments.rows_to_csv(rows)
    _emit(text, args, "table1")


def cmd_calibrate(args):
    with open(args.trace, encoding="utf-8") as fh:
        trace = photonics.trace_from_csv(fh.read())
    nu = photonics.calibrate_visibility(trace, args.mu, args.dark)
    sys.stdout.write(_json({"nu": nu, "pulses": int(trace.size)}))


# -- parser --------------------------------------------------------------------

def _optical(p, mu=True):
    if mu:
        p.add_argument("--mu", type=float, default=experiments.NOMINAL_MU, help="mean photon number per pulse")
    p.add_argument("--nu", type=float, default=experiments.NOMINAL_NU, help="interference visibility")
    p.add_argument("--dark", type=float, default=0.0, help="dark-count probability per detector and gate")


def _protocol(p, n_required=True):
    p.add_argument("--n", type=int, required=n_required, default=None)
    p.add_argument("--m", type=int, default=None, help="clause count (default: n)")
    p.add_argument("--delta", type=float, default=satgen.DEFAULT_DELTA)
    p.add_argument("--gamma", type=float, default=protocol.DEFAULT_GAMMA)


def _output(p, fmt=True):
    p.add_argument("--out", default=None)
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npverify", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="JSON file of defaults; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-instance", help="write a balanced planted instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=int, default=satgen.DEFAULT_DEGREE)
    p.add_argument("--delta", type=float, default=satgen.DEFAULT_DELTA)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("analyze", help="analytic probabilities, thresholds and bounds")
    _protocol(p)
    _optical(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mu-window", help="mean photon numbers meeting the targets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--delta", type=float, default=satgen.DEFAULT_DELTA)
    p.add_argument("--c-min", type=float, default=protocol.C_MIN)
    p.add_argument("--s-max", type=float, default=protocol.S_MAX)
    p.add_argument("--mu-max", type=float, default=10.0)
    _optical(p, mu=False)
    p.set_defaults(func=cmd_mu_window)

    p = sub.add_parser("run", help="honest protocol runs, RunReport JSON")
    _protocol(p)
    _optical(p)
    p.add_argument("--mode", choices=(experiments.ASSIGNMENT, experiments.INSTANCE),
                   default=experiments.ASSIGNMENT)
    p.add_argument("--instance", default=None, help="instance file (instance mode)")
    p.add_argument("--degree", type=int, default=satgen.DEFAULT_DEGREE)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    _output(p, fmt=False)
    p.set_defaults(func=cmd_run, format="json")

    p = sub.add_parser("soundness", help="cheating-Merlin runs on an unsatisfiable instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--strategy", choices=[k.value for k in adversary.StrategyKind],
                   default=adversary.StrategyKind.EXHAUSTIVE.value)
    p.add_argument("--assignment", default=None, help="bit string for fixed-assignment")
    p.add_argument("--delta", type=float, default=satgen.DEFAULT_DELTA)
    p.add_argument("--gamma", type=float, default=protocol.DEFAULT_GAMMA)
    _optical(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    _output(p, fmt=False)
    p.set_defaults(func=cmd_soundness, format="json")

    for name, func, default_grid, help_ in (
            ("sweep-mu", cmd_sweep_mu, "0.05:4:80", "sweep the mean photon number"),
            ("sweep-n", cmd_sweep_n, "5000:14000:10", "sweep the instance size")):
        p = sub.add_parser(name, help=help_)
        _protocol(p, n_required=False)
        _optical(p)
        p.add_argument("--grid", default=default_grid, help="'a,b,c' or 'start:stop:count'")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--mode", choices=(experiments.ASSIGNMENT, experiments.INSTANCE),
                       default=experiments.ASSIGNMENT)
        p.add_argument("--seed", type=int, required=True)
        _output(p)
        p.set_defaults(func=func, n=10000)

    p = sub.add_parser("classical-cost", help="operations needed for the missing bits")
    p.add_argument("--missing", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--s-clk", type=int, default=None)
    p.add_argument("--gamma", type=float, default=protocol.DEFAULT_GAMMA)
    p.set_defaults(func=cmd_classical_cost)

    p = sub.add_parser("delta", help="exhaustive unsatisfiability gap of a small instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("table1", help="replicate the experimental table")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--delta", type=float, default=satgen.DEFAULT_DELTA)
    p.add_argument("--seed", type=int, required=True)
    _output(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("calibrate", help="estimate visibility from an all-zeros trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--dark", type=float, default=0.0)
    p.set_defaults(func=cmd_calibrate)
    return parser


def _load_config(path: str, command: str) -> dict:
    """Merge the top-level scalars with the section named after the command."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    merged = {k.replace("-", "_"): v for k, v in cfg.items() if not isinstance(v, dict)}
    merged.update({k.replace("-", "_"): v for k, v in cfg.get(command, {}).items()})
    return merged


def _apply_config(parser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    ns, rest = pre.parse_known_args(argv)
    if not ns.config:
        return
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in rest if a in choices), None)
    if command is None:
        return
    cfg = _load_config(ns.config, command)
    sub = choices[command]
    dests = {a.dest: a for a in sub._actions}
    unknown = set(cfg) - set(dests) - {"output_dir", "format"}
    if unknown:
        raise ValueError(f"unknown config keys for {command}: {sorted(unknown)}")
    for key in cfg:
        if key in dests:
            dests[key].required = False
    sub.set_defaults(**cfg)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
    except adversary.PromiseViolation as e:
        _log(f"promise violation: {e}")
        return EXIT_PROMISE
    except (ValueError, OSError) as e:
        _log(f"error: {e}")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
