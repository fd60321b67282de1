"""Experiment driver.

Commands: split, check, run, run-sys, rates, audit, errata, table2, figures.
Exit code 0 means every requested check passed. Flags can also be supplied
through a plain key=value file via --config; explicit flags win.

CSV conventions: '.' decimal separator, '\\n' line endings, trajectory
values at full round-trip precision, table values at 6 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    convergence_rates,
    elementary_stability_audit,
    errata_report,
    positivity_audit,
    rate_between,
)
from .denominator import check_H_conditions
from .problems import get_problem, get_scheme, problem_names, scheme_bundles
from .schemes import integrate
from .splitting import theorem1_split, validate_representation
from .systems import (
    DEFAULT_STARTS,
    conserved_series,
    get_system,
    integrate_system,
    plain_config,
    second_order_config,
    system_names,
)

TABLE2_H = (1e-1, 1e-2, 1e-3, 1e-4)
TABLE2_H_FULL = TABLE2_H + (1e-5,)
FIGURE_H = 1.25
FIGURE_STEPS = 40


def _fmt_table(x) -> str:
    return "" if x is None else f"{x:.6g}"


def _fmt_full(x) -> str:
    return repr(float(x))


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_file(path: str) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_h_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_split(args) -> int:
    problem = get_problem(args.problem)
    rep = theorem1_split(problem)
    report = validate_representation(problem, rep)
    ys = np.linspace(max(problem.domain_hint[0], 0.0), problem.domain_hint[1], 5)
    print(f"derived representation for {problem.name} (provenance {rep.provenance})")
    print(f"{'y':>10} {'f_plus':>14} {'f_minus':>14} {'residual':>12}")
    for y in ys:
        fp, fm = float(rep.f_plus(y)), float(rep.f_minus(y))
        res = fp + y * fm - float(problem.f(y))
        print(f"{y:>10.4g} {fp:>14.6g} {fm:>14.6g} {res:>12.3e}")
    print(report)
    return 0 if report.passed else 1


def cmd_check(args) -> int:
    bundle = get_scheme(args.problem, args.scheme)
    if bundle.rep is None or bundle.config is None or bundle.spec is None:
        print(f"{args.scheme} is a step-only baseline; no condition report", file=sys.stderr)
        return 2
    problem = get_problem(args.problem)
    report = check_H_conditions(problem, bundle.rep, bundle.config, bundle.spec)
    print(f"conditions for {args.problem}/{args.scheme}:")
    print(report)
    if args.out:
        rows = [[name, "pass" if ok else "fail"]
                for name, ok in zip(("H1", "H2", "H3", "H4"),
                                    (report.h1, report.h2, report.h3, report.h4))]
        rows += [["note", w] for w in report.witnesses]
        _write_csv(args.out, ["condition", "status"], rows)
    return 0 if report.passed else 1


def cmd_run(args) -> int:
    problem = get_problem(args.problem)
    bundle = get_scheme(args.problem, args.scheme)
    traj = integrate(bundle.step, args.y0, args.h, args.t_end, problem_name=problem.name)
    rows = []
    for t, y in zip(traj.times, traj.states):
        if problem.exact_solution is not None:
            exact = float(problem.exact_solution(t, args.y0))
            rows.append([_fmt_full(t), _fmt_full(y), _fmt_full(exact), _fmt_full(abs(y - exact))])
        else:
            rows.append([_fmt_full(t), _fmt_full(y), "", ""])
    _write_csv(args.out, ["t", "y", "y_exact", "abs_error"], rows)
    print(f"wrote {args.out}: {len(rows)} rows, final y = {traj.final_state:.9g}, "
          f"min state = {traj.min_state:.3g}")
    return 0


def cmd_run_sys(args) -> int:
    params = {}
    if args.params:
        for token in args.params.split(","):
            key, _, value = token.partition("=")
            params[key.strip()] = float(value)
    system = get_system(args.model, **params)
    state0 = tuple(float(v) for v in args.y0.split(",")) if args.y0 else DEFAULT_STARTS[args.model]
    if args.scheme == "nsfd2":
        cfg = second_order_config(system)
    else:
        cfg = plain_config(system)
    traj = integrate_system(system, cfg, state0, args.h, args.t_end)
    header = ["t"] + [f"x_{i + 1}" for i in range(system.dim)]
    cons = conserved_series(system, traj)
    if cons is not None:
        header.append("conserved")
    rows = []
    for k, t in enumerate(traj.times):
        row = [_fmt_full(t)] + [_fmt_full(v) for v in traj.states[k]]
        if cons is not None:
            row.append(_fmt_full(cons[k]))
        rows.append(row)
    _write_csv(args.out, header, rows)
    print(f"wrote {args.out}: {len(rows)} rows, min state = {traj.min_state:.3g}")
    return 0


def cmd_rates(args) -> int:
    problem = get_problem(args.problem)
    bundle = get_scheme(args.problem, args.scheme)
    table = convergence_rates(problem, bundle.step, _parse_h_list(args.h_list),
                              args.t_end, args.y0)
    print(table)
    if args.out:
        rows = [[_fmt_table(r.h), _fmt_table(r.error), _fmt_table(r.rate), r.note]
                for r in table.rows]
        _write_csv(args.out, ["h", "error", "rate", "note"], rows)
    return 0


def cmd_table2(args) -> int:
    problem = get_problem("logistic")
    h_list = TABLE2_H_FULL if args.full else TABLE2_H
    tables = {label: convergence_rates(problem, get_scheme("logistic", label).step,
                                       h_list, 1.0, 0.5)
              for label in ("snsfd1", "snsfd2", "wood")}
    header = ["h",
              "snsfd1_error", "snsfd1_rate",
              "snsfd2_error", "snsfd2_rate",
              "wood_error", "wood_rate"]
    rows = []
    for i, h in enumerate(h_list):
        row = [f"{h:.0e}"]
        for label in ("snsfd1", "snsfd2", "wood"):
            r = tables[label].rows[i]
            row += [_fmt_table(r.error), _fmt_table(r.rate)]
        rows.append(row)
    _write_csv(args.out, header, rows)
    print(f"wrote {args.out}")
    for label in ("snsfd1", "snsfd2", "wood"):
        print(tables[label])
    return 0


def cmd_figures(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    problem = get_problem("logistic")
    t_end = FIGURE_H * FIGURE_STEPS
    trajs = {
        label: integrate(get_scheme("logistic", label).step, 0.5, FIGURE_H, t_end,
                         problem_name="logistic")
        for label in ("euler", "rk2", "snsfd1", "wood")
    }

    def write(path: Path, labels: list[str]) -> None:
        rows = []
        for k, t in enumerate(trajs[labels[0]].times):
            rows.append([_fmt_full(t)] + [_fmt_full(trajs[lab].states[k]) for lab in labels])
        _write_csv(str(path), ["t"] + labels, rows)

    write(outdir / "fig1.csv", ["euler", "rk2", "snsfd1"])
    write(outdir / "fig2.csv", ["snsfd1", "wood"])
    print(f"wrote {outdir / 'fig1.csv'} and {outdir / 'fig2.csv'} "
          f"({FIGURE_STEPS + 1} rows each)")
    return 0


def cmd_audit(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = []
    names = [args.problem] if args.problem else problem_names()
    if not names:
        print("warning: empty registry selection; nothing audited", file=sys.stderr)
        return 0
    h_stab = (0.1, 1.25, 10.0, 100.0)
    for pname in names:
        problem = get_problem(pname)
        for label, bundle in sorted(scheme_bundles(pname).items()):
            in_family = (bundle.rep is not None and bundle.config is not None
                         and bundle.spec is not None and bundle.config.weights_admissible)
            if in_family and bundle.spec.kind != "custom":
                conditions = check_H_conditions(problem, bundle.rep, bundle.config, bundle.spec)
                print(f"[conditions] {pname}/{label}: {'pass' if conditions.passed else 'fail'}")
                # non-derived denominators are expected to miss H3; only a
                # derived scheme failing its own contract is an audit failure
                if "derived" in (bundle.spec.label or "") and not conditions.passed:
                    failures.append(f"{pname}/{label}: derived scheme fails conditions")
            if bundle.positive:
                y0s = rng.uniform(0.0, 10.0, size=args.samples)
                pos = positivity_audit(bundle.step, y0s, (0.1, 1.0, 10.0, 100.0),
                                       n_steps=args.steps)
                print(f"[positivity] {pname}/{label}: {pos}")
                if not pos.passed:
                    failures.append(f"{pname}/{label}: positivity violated")
            if bundle.elementary_stable:
                kwargs = dict(step_map=bundle.step)
                if in_family:
                    kwargs.update(rep=bundle.rep, config=bundle.config, spec=bundle.spec)
                stab = elementary_stability_audit(problem, h_stab, scan_points=args.scan, **kwargs)
                print(f"[stability] {pname}/{label}: {'pass' if stab.passed else str(stab)}")
                if not stab.passed:
                    failures.append(f"{pname}/{label}: elementary stability violated")
    if failures:
        print("\nFAILURES:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    print("\nall audits passed")
    return 0


def cmd_errata(args) -> int:
    text = errata_report()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # flags listed in _required may come from either the command line or a
    # --config file, so they are declared optional here and validated in main()
    config_parent = argparse.ArgumentParser(add_help=False)
    config_parent.add_argument("--config", help="key=value file with default flag values")
    parser = argparse.ArgumentParser(prog="nsfd", description=__doc__, parents=[config_parent],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", parents=[config_parent], help="derive and validate a representation")
    p.add_argument("--problem", choices=problem_names())
    p.set_defaults(func=cmd_split, _required=("problem",))

    p = sub.add_parser("check", parents=[config_parent], help="H1-H4 condition report for a scheme")
    p.add_argument("--problem", choices=problem_names())
    p.add_argument("--scheme")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check, _required=("problem", "scheme"))

    p = sub.add_parser("run", parents=[config_parent], help="integrate a scalar problem, write CSV")
    p.add_argument("--problem", choices=problem_names())
    p.add_argument("--scheme")
    p.add_argument("--y0", type=float, default=0.5)
    p.add_argument("--h", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run, _required=("problem", "scheme", "h", "t_end", "out"))

    p = sub.add_parser("run-sys", parents=[config_parent], help="integrate a system, write CSV")
    p.add_argument("--model", choices=system_names())
    p.add_argument("--params", help="comma-separated k=v model parameters")
    p.add_argument("--scheme", default="nsfd2", choices=("nsfd2", "plain"))
    p.add_argument("--y0", help="comma-separated start state")
    p.add_argument("--h", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run_sys, _required=("model", "h", "t_end", "out"))

    p = sub.add_parser("rates", parents=[config_parent], help="error/rate table for one scheme")
    p.add_argument("--problem", choices=problem_names())
    p.add_argument("--scheme")
    p.add_argument("--h-list", default="1e-1,1e-2,1e-3")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--y0", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rates, _required=("problem", "scheme"))

    p = sub.add_parser("table2", parents=[config_parent], help="benchmark error/rate table, all three schemes")
    p.add_argument("--out")
    p.add_argument("--full", action="store_true", help="include the h = 1e-5 row")
    p.set_defaults(func=cmd_table2, _required=("out",))

    p = sub.add_parser("figures", parents=[config_parent], help="large-step comparison trajectories")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_figures, _required=())

    p = sub.add_parser("audit", parents=[config_parent], help="conditions + positivity + stability for the registry")
    p.add_argument("--problem", choices=problem_names())
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=64, help="random starts per scheme")
    p.add_argument("--steps", type=int, default=1000, help="steps per positivity run")
    p.add_argument("--scan", type=int, default=20000, help="fixed-point scan resolution")
    p.set_defaults(func=cmd_audit, _required=())

    p = sub.add_parser("errata", parents=[config_parent], help="printed vs derived denominator report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_errata, _required=())

    return parser


def _apply_config(parser: argparse.ArgumentParser, command: str, defaults: dict) -> None:
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        subparser = getattr(action, "choices", {}).get(command)
        if subparser is None:
            continue
        typed = {}
        for a in subparser._actions:  # noqa: SLF001
            if a.dest not in defaults:
                continue
            raw = defaults[a.dest]
            if isinstance(a, argparse._StoreTrueAction):  # noqa: SLF001
                typed[a.dest] = str(raw).lower() in ("1", "true", "yes", "on")
            elif a.type is not None:
                typed[a.dest] = a.type(raw)
            else:
                typed[a.dest] = raw
        subparser.set_defaults(**typed)


def main(argv=None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre_args, rest = pre.parse_known_args(argv)
    parser = build_parser()
    if pre_args.config and rest:
        _apply_config(parser, rest[0], _load_config_file(pre_args.config))
    args = parser.parse_args(argv)
    missing = [name for name in args._required if getattr(args, name) in (None, "")]
    if missing:
        parser.error(f"missing required value(s) for {args.command}: "
                     + ", ".join(f"--{m.replace('_', '-')}" for m in missing))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
