"""Command-line interface.

Subcommands:
  run       execute one scenario and print (or write) its JSON report
  verify    run a deterministic suite; runtimes are zeroed so repeated
            invocations with the same seed emit identical bytes
  plotdata  dump per-point or per-cube profile data as CSV
  constants evaluate the explicit bound constants for given exponents

Exit codes: 0 success, 1 failed checks or internal error, 2 bad
configuration or parameters, 3 capacity limits exceeded.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import carleson as C
from . import grid as g
from . import kernels as K
from . import lab
from . import weights as W
from .errors import SqfnError


def _scenario_overrides(args) -> dict:
    over = {}
    for key in ("grid_h", "t_min", "t_max", "per_octave"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    return over


def _cmd_run(args) -> int:
    report = lab.run_scenario(args.scenario, seed=args.seed,
                              measure_runtime=True,
                              **_scenario_overrides(args))
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report.verdict else 1


def _cmd_verify(args) -> int:
    selection = None if args.suite == ["all"] else args.suite
    report = lab.run_suite(selection, seed=args.seed)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report.verdict else 1


def _cmd_plotdata(args) -> int:
    rows = _plot_rows(args.scenario, seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write("key,value\n")
        for key, value in rows:
            fh.write(f"{key},{value!r}\n")
    return 0


def _plot_rows(scenario: str, seed: int = 7) -> list[tuple]:
    """Per-point profile for the pointwise scenarios, per-cube values for
    the averaged ones."""
    if scenario == "ex38":
        op = lab.haar_multiplier_op(g.interval(-1.5, 0.5), 2.0 ** -8,
                                    guard=0.25)
        cf = C.theta_one_field(op, g.ScaleGrid(2.0 ** -9, 1.0, 8))
        unit = g.interval(-1.0, 0.0)
        xs = -np.linspace(2.0 ** -8, 1.0 - 2.0 ** -8, 64)
        return [(float(x), C.strong_point_value(cf, unit, float(x)))
                for x in np.sort(xs)]
    if scenario == "ex37":
        qtb = lab.numeric_qtb(K.standard_family(1).psi,
                              lab.holder_bump(0.5))
        ts = 2.0 ** np.arange(-8, 9, dtype=float)
        xs = np.linspace(-40.0, 40.0, 2049)
        return [(float(t), float(np.max(np.abs(qtb(xs, float(t))))))
                for t in ts]
    if scenario in ("meanzero", "bilinear-weighted"):
        rep = lab.run_scenario(scenario, seed=seed)
        return [(c.id, c.computed) for c in rep.checks]
    raise SqfnError(f"no plot data defined for scenario {scenario!r}")


def _cmd_constants(args) -> int:
    ps = [float(v) for v in args.p]
    ap = [float(v) for v in args.ap]
    m = len(ps)
    c43 = C.bound_constant_43(ap, ps, args.sc, m)
    out = {"bound_constant": c43}
    bmax = max(ap)
    if bmax > 1.0:
        out["c0_of_B"] = C.c0_of_B(bmax, [W.dual_exponent(p) for p in ps],
                                   args.sc, m)
    for key, value in out.items():
        print(f"{key} = {value!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqfn",
        description="numerical laboratory for multilinear square functions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("scenario", choices=lab.SCENARIO_NAMES)
    p_run.add_argument("--grid-h", dest="grid_h", type=float, default=None)
    p_run.add_argument("--t-min", dest="t_min", type=float, default=None)
    p_run.add_argument("--t-max", dest="t_max", type=float, default=None)
    p_run.add_argument("--per-octave", dest="per_octave", type=int,
                       default=None)
    p_run.add_argument("--seed", type=int, default=7)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify", help="run a deterministic suite")
    p_ver.add_argument("--suite", nargs="+", default=["all"])
    p_ver.add_argument("--seed", type=int, default=7)
    p_ver.add_argument("--out", default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_plot = sub.add_parser("plotdata", help="dump profile data as CSV")
    p_plot.add_argument("scenario", choices=lab.SCENARIO_NAMES)
    p_plot.add_argument("--seed", type=int, default=7)
    p_plot.add_argument("--out", required=True)
    p_plot.set_defaults(func=_cmd_plotdata)

    p_const = sub.add_parser("constants", help="evaluate bound constants")
    p_const.add_argument("--p", nargs="+", required=True)
    p_const.add_argument("--ap", nargs="+", required=True)
    p_const.add_argument("--sc", type=float, default=0.0)
    p_const.set_defaults(func=_cmd_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SqfnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
