"""Command-line interface.

    risbis solve   --scenario table1 --out runs/a [--seed 0] [--set solver.epsilon=1e-9]
    risbis sweep   --scenario table1 --out runs/b
    risbis oracle  --scenario small.scenario --out runs/c --oracle-bits 6
    risbis compare --scenario table1 --out runs/d [--oracle-bits 6]
    risbis study   --scenario fig12_rg --out runs/e --study rg

Exit codes: 0 success, 2 usage/config error, 3 infeasible, 4 numeric failure.
The sidecar ``<command>.meta.json`` is written before any data file.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import results
from .baselines import exhaustive_oracle
from .errors import ConfigError, InfeasibleError, NumericError, SearchSpaceError
from .scenario import build_setup, load_scenario
from .solver import build_report

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4
STUDIES = ("suppression", "weighted", "cdf", "rg")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, metavar="PATH",
                        help="scenario file, or the name of a bundled scenario")
    common.add_argument("--out", required=True, metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, default=0, metavar="INT")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        dest="overrides", help="override a scenario field (repeatable)")
    common.add_argument("--oracle-bits", type=int, default=None, metavar="INT")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="risbis", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="run the bisection solver")
    sub.add_parser("sweep", parents=[common], help="solve and write beam-pattern cross sections")
    sub.add_parser("oracle", parents=[common], help="exhaustive phase-grid search (small N)")
    sub.add_parser("compare", parents=[common], help="metrics table across methods")
    st = sub.add_parser("study", parents=[common], help="run one of the comparison studies")
    st.add_argument("--study", required=True, choices=STUDIES)
    st.add_argument("--trials", type=int, default=None, metavar="INT")
    return p


def _peak_if_needed(setup, seed):
    if not setup.needs_peak:
        return None
    return ex.peak_reference(ex.solve_nonconstraint(setup, seed))


def cmd_solve(args, scenario, out):
    setup = build_setup(scenario)
    results.write_sidecar(out / "solve.meta.json", scenario, args.seed, "solve")
    peak = _peak_if_needed(setup, args.seed)
    report = ex.solve_bis(setup, peak=peak)
    results.write_report(out / "report.json", report)
    print(f"t_root={report.t_root:.6g} min_power={report.min_power:.6g} "
          f"max_violation={report.max_violation:.3g} termination={report.termination}")


def cmd_sweep(args, scenario, out):
    setup = build_setup(scenario)
    results.write_sidecar(out / "sweep.meta.json", scenario, args.seed, "sweep",
                          {"sweep": {"theta": list(scenario.sweep.theta),
                                     "phi": list(scenario.sweep.phi),
                                     "step": scenario.sweep.step}})
    nc = ex.solve_nonconstraint(setup)
    runs = {"nonconstraint": nc}
    if setup.suppression_points:
        runs["bis"] = ex.solve_bis(setup, peak=ex.peak_reference(nc))
    for name, rep in runs.items():
        results.write_pattern(out / f"pattern_{name}.csv", ex.default_sweep(setup, rep.omega_star))
        results.write_report(out / f"report_{name}.json", rep)


def cmd_oracle(args, scenario, out):
    bits = args.oracle_bits or scenario.study.bits
    setup = build_setup(scenario)
    inst = setup.instance(peak=_peak_if_needed(setup, args.seed))
    if inst.N * bits > 24:
        raise SearchSpaceError(f"search space 2^{inst.N * bits} exceeds the 2^24 oracle bound")
    results.write_sidecar(out / "oracle.meta.json", scenario, args.seed, "oracle", {"bits": bits})
    res = exhaustive_oracle(inst, bits)
    rep = build_report(inst, res.best_omega, -res.best_value,
                       termination="exhaustive" if res.feasible else "exhaustive-infeasible",
                       epsilon=0.0, delta=0.0, lam_final=float("nan"), method=f"Oracle-{bits}bit")
    results.write_report(out / "oracle.json", rep)
    print(f"best_value={res.best_value:.6g} feasible={res.feasible}")


def cmd_compare(args, scenario, out):
    results.write_sidecar(out / "compare.meta.json", scenario, args.seed, "compare",
                          {"oracle_bits": args.oracle_bits})
    rows, _ = ex.run_compare(scenario, oracle_bits=args.oracle_bits)
    results.write_metrics(out / "metrics.csv", rows)
    for r in rows:
        print(f"{r.method:<22} {r.status:<6} min_ue={r.min_ue_power:.4g} RG={r.relative_gain:.2f} dB")


def cmd_study(args, scenario, out):
    trials = args.trials or scenario.study.trials
    results.write_sidecar(out / f"study_{args.study}.meta.json", scenario, args.seed, "study",
                          {"study": args.study, "trials": trials,
                           "note": f"desk scale: {trials} trials per point"})
    if args.study == "suppression":
        st = ex.run_suppression_study(scenario, scenario.study.threshold_factors, seed=args.seed)
        results.write_metrics(out / "metrics.csv", st.rows)
        for name, pat in st.patterns.items():
            slug = name.lower().replace(" ", "_").replace("=", "").replace("-", "")
            results.write_pattern(out / f"pattern_{slug}.csv", pat)
    elif args.study == "weighted":
        rows = ex.run_weighted_study(scenario, trials=trials, seed=args.seed)
        results.write_metrics(out / "metrics.csv", rows)
    elif args.study == "cdf":
        results.write_cdf(out / "cdf.csv", ex.run_cdf_study(scenario, trials=trials, seed=args.seed))
    else:
        results.write_rg(out / "rg.csv", ex.run_rg_study(scenario, trials=trials, seed=args.seed))


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "oracle": cmd_oracle,
            "compare": cmd_compare, "study": cmd_study}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(args.scenario, args.overrides).with_seed(args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, scenario, out)
    except (ConfigError, SearchSpaceError) as exc:
        print(f"risbis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"risbis: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"risbis: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
