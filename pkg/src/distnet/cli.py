"""distnet command line.

    distnet analyze  NET.json
    distnet allocate NET.json --budget C [--max-iters K] [--seed S]
    distnet psd      NET.json
    distnet sweep    NET.json [--points N] [--wmax X] [--out FILE]
    distnet lmi      NET.json --gamma G

Reports are JSON on stdout; ``sweep`` writes CSV. Exit codes:
0 success (PSD / feasible), 1 negative verdict, 2 input error,
3 port disconnection, 4 no feasible allocation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .allocate import AllocationProblem, SolverOptions, solve
from .errors import InfeasibleAllocationError, PortDisconnectedError
from .graph import connected_components, laplacian, port_matrix, positive, validate_ports
from .hinf import (
    NetworkSystem,
    algebraic_connectivity,
    corollary_bound,
    default_grid,
    gain_matrix,
    hinf_network,
    hinf_sweep,
    lmi_feasible,
)
from .netfile import Network, NetworkFileError, loads
from .signed import critical_scale, psd_check
from .spectral import TolerancePolicy, sym_eig

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_DISCONNECTED = 3
EXIT_INFEASIBLE = 4


class InputError(Exception):
    pass


def _num(x):
    """12 significant digits; non-finite values as strings."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    y = float(f"{x:.12g}")
    return 0.0 if y == 0 else y


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _nonneg(net: Network) -> None:
    bad = [j + 1 for j, e in enumerate(net.graph.edges) if e.w < 0]
    if bad:
        raise InputError(
            f"edge(s) {', '.join(map(str, bad))} have negative weight; use 'psd' for signed graphs"
        )


def _require_ports(net: Network) -> None:
    check = validate_ports(net.graph, net.ports)
    if not check.ok:
        raise PortDisconnectedError(check.message, check.offending)


def _one_based(groups):
    return [[v + 1 for v in grp] for grp in groups]


def cmd_analyze(net: Network, args, tol: TolerancePolicy) -> tuple[dict, int]:
    _nonneg(net)
    _require_ports(net)
    g = net.graph
    L = laplacian(g)
    sys_ = NetworkSystem.from_ports(g, net.ports)
    cert = hinf_network(sys_, tol)
    comps = connected_components(g, positive)
    spectrum = sym_eig(L).eigenvalues
    lam2 = algebraic_connectivity(L) if g.n > 1 else None
    ports = []
    G = gain_matrix(L, sys_.E, sys_.labels) if net.ports else np.zeros((0, 0))
    for i, p in enumerate(net.ports):
        col = sys_.E[:, i]
        if len(comps) == 1:
            bound = corollary_bound(L, col, col, tol)
        else:
            bound = None  # needs a connected graph
        ports.append({
            "in": p.inflow + 1,
            "out": p.outflow + 1,
            "alpha": p.alpha,
            "gain": G[i, i],
            "corollary_bound": bound,
        })
    res = {
        "n": g.n,
        "m": g.m,
        "components": _one_based(comps),
        "spectrum": spectrum,
        "algebraic_connectivity": lam2,
        "gamma": cert.gamma,
        "witness": cert.witness,
        "lmi_margin": cert.lmi_margin,
        "ports": ports,
    }
    return res, EXIT_OK


def cmd_allocate(net: Network, args, tol: TolerancePolicy) -> tuple[dict, int]:
    if not (args.budget > 0 and math.isfinite(args.budget)):
        raise InputError(f"--budget must be a positive number, got {args.budget}")
    if args.max_iters < 1:
        raise InputError("--max-iters must be at least 1")
    if not net.ports:
        raise InputError("allocation needs at least one port")
    problem = AllocationProblem(net.graph, port_matrix(net.ports, net.graph.n), args.budget)
    opts = SolverOptions(max_iters=args.max_iters, seed=args.seed)
    r = solve(problem, opts, tol)
    res = {
        "budget": args.budget,
        "weights": r.weights,
        "gamma": r.gamma,
        "iterations": r.iterations,
        "best_gap": r.best_gap,
        "lmi_margin": r.certificate.lmi_margin,
        "witness": r.certificate.witness,
    }
    return res, EXIT_OK


def cmd_psd(net: Network, args, tol: TolerancePolicy) -> tuple[dict, int]:
    g = net.graph
    v = psd_check(g, tol)
    try:
        rho = critical_scale(g)
    except PortDisconnectedError:
        rho = None  # a cross-component negative edge: no scaling helps
    res = {
        "psd": v.overall,
        "condition1": v.condition1,
        "condition2": v.condition2,
        "bad_edges": [j + 1 for j in v.bad_edges],
        "slack": v.slack,
        "slack_min_eig": v.slack_min,
        "critical_scale": rho,
        "direct_min_eig": v.direct_min_eig,
        "direct_psd": v.direct_psd,
        "spectrum": sym_eig(laplacian(g)).eigenvalues,
    }
    return res, EXIT_OK if v.overall else EXIT_NEGATIVE


def cmd_lmi(net: Network, args, tol: TolerancePolicy) -> tuple[dict, int]:
    if not (args.gamma >= 0 and math.isfinite(args.gamma)):
        raise InputError(f"--gamma must be a nonnegative number, got {args.gamma}")
    _nonneg(net)
    L = laplacian(net.graph)
    E = port_matrix(net.ports, net.graph.n)
    verdict = lmi_feasible(L, E, args.gamma, tol)
    res = {"gamma": args.gamma, "feasible": verdict.feasible, "min_eig": verdict.margin}
    return res, EXIT_OK if verdict.feasible else EXIT_NEGATIVE


def sweep_csv(net: Network, points: int, wmax: float | None) -> str:
    _nonneg(net)
    _require_ports(net)
    L = laplacian(net.graph)
    E = port_matrix(net.ports, net.graph.n)
    grid = default_grid(L, points - 1, wmax)
    sw = hinf_sweep(L, E, grid=grid)
    lines = ["omega,sigma_max"]
    lines += ["%.12g,%.12g" % (w, s) for w, s in zip(sw.omegas, sw.sigmas)]
    return "\n".join(lines) + "\n"


def cmd_sweep(net: Network, args, tol: TolerancePolicy) -> int:
    if args.points < 1:
        raise InputError("--points must be at least 1")
    if args.wmax is not None and not (args.wmax > 0 and math.isfinite(args.wmax)):
        raise InputError("--wmax must be a positive number")
    text = sweep_csv(net, args.points, args.wmax)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "allocate": cmd_allocate,
    "psd": cmd_psd,
    "lmi": cmd_lmi,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distnet", description="Gain analysis and weight allocation for distribution networks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="network JSON file ('-' for stdin)")
    common.add_argument("--tol-psd", type=float, default=None, metavar="ATOL",
                        help="absolute slack for PSD verdicts (default 1e-9*max(1,|lambda|max))")
    common.add_argument("--tol-rank", type=float, default=None, metavar="RTOL",
                        help="relative cutoff for zero eigenvalues (default n*eps)")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="components, spectrum, gain, per-port bounds")

    p = sub.add_parser("allocate", parents=[common], help="minimize the gain over a weight budget")
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)
    p.add_argument("--seed", type=int, default=0)

    sub.add_parser("psd", parents=[common], help="semidefiniteness of a signed Laplacian")

    p = sub.add_parser("sweep", parents=[common], help="largest singular value over frequency, as CSV")
    p.add_argument("--points", type=int, default=400, help="rows including omega = 0 (default 400)")
    p.add_argument("--wmax", type=float, default=None, help="largest frequency")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")

    p = sub.add_parser("lmi", parents=[common], help="feasibility of the gain LMI at a given level")
    p.add_argument("--gamma", type=float, required=True)
    return ap


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _flags(args) -> dict:
    skip = {"command", "file", "tol_psd", "tol_rank"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    try:
        tol = TolerancePolicy(rank_rtol=args.tol_rank, psd_atol=args.tol_psd)
        raw = _read(args.file)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"{args.file} is not UTF-8: {exc}") from exc
        net = loads(text)
        if args.command == "sweep":
            return cmd_sweep(net, args, tol)
        results, code = COMMANDS[args.command](net, args, tol)
    except (InputError, NetworkFileError, OSError) as exc:
        print(f"distnet: error: {exc}", file=err)
        return EXIT_INPUT
    except PortDisconnectedError as exc:
        print(f"distnet: port disconnection: {exc}", file=err)
        return EXIT_DISCONNECTED
    except InfeasibleAllocationError as exc:
        print(f"distnet: infeasible: {exc}", file=err)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"distnet: error: {exc}", file=err)
        return EXIT_INPUT
    report = {
        "command": args.command,
        "inputs": {
            "file": args.file,
            "sha256": hashlib.sha256(raw).hexdigest(),
            "flags": _flags(args),
        },
        "results": results,
        "tolerances": tol.describe(),
        "version": __version__,
    }
    json.dump(_clean(report), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
