"""Command-line front end.

Agent and provider numbers on the command line are 1-based. Exit status is
0 on success, 1 for invalid input (bad file, failed validation), 2 for a
numerical failure and 64 for a usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import experiments, optimizer, realprice, stationary
from .errors import SpendnetError
from .netmodel import load_network, validate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _num(v) -> str:
    return format(float(v), ".17g")


def _vec(v) -> str:
    return " ".join(_num(e) for e in v)


def _agent_index(value, n, what):
    if not 1 <= value <= n:
        raise UsageError(f"{what} must be between 1 and {n}, got {value}")
    return value - 1


def _load(path):
    net = load_network(path)
    net.require_valid()
    return net


def cmd_validate(args, out):
    try:
        net = load_network(args.network)
    except SpendnetError as exc:
        print(f"invalid: {exc}", file=out)
        return EXIT_INVALID
    report = validate(net)
    if report.ok:
        print("ok", file=out)
        return EXIT_OK
    for v in report.violations:
        where = f" at {list(v.indices)}" if v.indices else ""
        print(f"violation {v.rule}: {v.message}{where}", file=out)
    return EXIT_INVALID


def cmd_stationary(args, out):
    net = _load(args.network)
    dist = stationary.solve_stationary(net, tol=args.tol, method=args.method, steps=args.steps)
    print(f"method: {dist.method}", file=out)
    print(f"total: {_num(dist.total)}", file=out)
    print(f"x: {_vec(dist.x)}", file=out)
    print(f"residual: {_num(dist.residual)}", file=out)
    return EXIT_OK


def cmd_simulate(args, out):
    net = _load(args.network)
    trace = stationary.iterate_currency(net, args.steps)
    if args.csv:
        stationary.write_trace(trace, args.csv)
    print(f"steps: {args.steps}", file=out)
    print(f"final: {_vec(trace[-1])}", file=out)
    print(f"cesaro: {_vec(stationary.cesaro_average(trace))}", file=out)
    print(f"total_drift: {_num(abs(trace[-1].sum() - net.total))}", file=out)
    return EXIT_OK


def cmd_optimize(args, out):
    net = _load(args.network)
    j = _agent_index(args.agent, net.n, "--agent")
    res = optimizer.optimize_spending(net, j, args.grid, args.refine)
    print(f"agent: {j + 1}", file=out)
    print(f"column: {_vec(res.column)}", file=out)
    print(f"x: {_vec(res.x)}", file=out)
    print(f"W_star: {_num(res.W_star)}", file=out)
    try:
        w_myopic = optimizer.evaluate_column(net, j, optimizer.myopic_column(net, j))
        print(f"W_myopic: {_num(w_myopic)}", file=out)
    except SpendnetError as exc:
        print(f"W_myopic: unavailable ({exc.code})", file=out)
    print(f"result_irreducible: {str(res.result_irreducible).lower()}", file=out)
    print(f"examined: {len(res.grid_trace)}", file=out)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["v", "feasible", "objective"])
            w.writerows(optimizer.trace_rows(res))
    return EXIT_OK


def _print_price(label, res, out):
    print(f"{label}mode: {res.mode}{' (literal formula, non-default)' if res.literal else ''}", file=out)
    print(f"{label}rp: {_num(res.rp)}", file=out)
    print(f"{label}dW_da: {_num(res.dW_da)}", file=out)
    print(f"{label}dx_da: {_vec(res.dx_da)}", file=out)
    print(f"{label}label_price: {_num(res.label_price)}", file=out)
    if res.negative_marginal:
        print(f"{label}flag: negative-marginal", file=out)


def cmd_real_price(args, out):
    net = _load(args.network)
    j = _agent_index(args.agent, net.n, "--agent")
    k = _agent_index(args.provider, net.n, "--provider")
    if args.a is not None:
        try:
            a = [float(t) for t in args.a.split(",")]
        except ValueError:
            raise UsageError(f"--a expects comma-separated numbers, got {args.a!r}") from None
        if len(a) != net.n:
            raise UsageError(f"--a needs {net.n} values, got {len(a)}")
    else:
        # spending amounts at t=0 implied by the agent's column and holdings
        a = net.P[:, j] * (net.x0[j] if net.x0[j] > 0 else 1.0)
    try:
        setup = realprice.DynamicSpendingSetup(a, target_k=k, agent=j)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.mode == "fixed":
        res = realprice.real_price_fixed(net, j, k, literal_formula=args.literal_paper_formula)
    else:
        if args.literal_paper_formula:
            raise UsageError("--literal-paper-formula applies to --mode fixed only")
        res = realprice.real_price_dynamic(net, setup)
    _print_price("", res, out)
    if args.oracle:
        fd_net = net if args.mode == "fixed" else setup.apply(net)
        fd = realprice.finite_diff_real_price(fd_net, setup, epsilon=args.epsilon, mode=args.mode)
        _print_price("oracle_", fd, out)
        print(f"relative_difference: {_num(abs(res.rp - fd.rp) / abs(fd.rp))}", file=out)
    return EXIT_OK


def cmd_sweep(args, out):
    if args.alphas:
        try:
            grid = experiments.parse_alpha_range(args.alphas)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        grid = experiments.default_alpha_grid()
    try:
        cfg = experiments.SweepConfig(tuple(grid), args.scenario, network_file=args.network,
                                      grid_points=args.grid, refine_rounds=args.refine)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = experiments.run_sweep(cfg, workers=args.workers)
    experiments.write_curves(rows, args.out)
    failed = sum(r.status != "ok" for r in rows)
    print(f"rows: {len(rows)}", file=out)
    print(f"failed: {failed}", file=out)
    print(f"out: {args.out}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spendnet", description="Currency-flow spending networks and real prices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a network definition")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stationary", help="stationary currency vector")
    p.add_argument("network")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--method", choices=("direct", "power", "cesaro"), default="direct")
    p.add_argument("--steps", type=int, default=100_000, help="iteration budget for power/cesaro")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("simulate", help="iterate x <- P x")
    p.add_argument("network")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--csv", help="write the trace as t,x_1,...,x_n")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="optimal spending column for one agent")
    p.add_argument("network")
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--grid", type=int, default=optimizer.DEFAULT_GRID)
    p.add_argument("--refine", type=int, default=optimizer.DEFAULT_REFINE)
    p.add_argument("--trace", help="write the share grid trace as v,feasible,objective")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("real-price", help="real price of a provider seen by an agent")
    p.add_argument("network")
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--provider", type=int, required=True)
    p.add_argument("--mode", choices=("fixed", "dynamic"), required=True)
    p.add_argument("--a", help="comma-separated spending amounts of the agent (dynamic mode)")
    p.add_argument("--oracle", action="store_true", help="also report the finite-difference estimate")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--literal-paper-formula", action="store_true",
                   help="fixed mode without allocation weights (comparison only)")
    p.set_defaults(func=cmd_real_price)

    p = sub.add_parser("sweep", help="alpha sweep for one of the three scenarios")
    p.add_argument("network")
    p.add_argument("--scenario", choices=("fig1", "fig2", "fig3"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alphas", help="lo:step:hi (default 0.01:0.01:0.97)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--grid", type=int, default=optimizer.DEFAULT_GRID)
    p.add_argument("--refine", type=int, default=optimizer.DEFAULT_REFINE)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SpendnetError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
