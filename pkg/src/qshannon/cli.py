"""Batch driver: ``qshannon <command> [options]``.

Every command writes a CSV (or JSON) table to ``--out`` or standard output.
Numbers are printed with 12 significant digits so that repeated runs with
the same arguments are byte-identical.  Exit status is 0 on success, 1 when
a checked invariant is violated and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .channel_coding import (
    BlockCqChannel,
    code_rate_bound,
    constant_composition_code,
    error_probability,
    greedy_maximal_code,
)
from .entropy import CqChannel, MultipartiteState, holevo_information, subsystem_entropy, von_neumann_entropy
from .errors import ConfigError, InvariantViolation, QShannonError
from .linalg import matrix_from_json
from .objects import Ensemble
from .regions import MacChannel, all_corner_points, mac_outer_region, optimize_holevo
from .reliability import greedy_exponent_point, sphere_packing_point
from .source_coding import (
    schumacher_fidelity_bound,
    schumacher_rate_bound,
    schumacher_scheme,
    scheme_fidelities,
)
from .typicality import TypeVector
from .verify import DEFAULT_TOL, run_suite


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    from .fixtures import bundled_model

    for name in (path, f"{path}.json"):
        q = bundled_model(name)
        if q.exists():
            return q
    raise ConfigError(f"model file {path!r} not found")


def _load(path: str) -> dict:
    with open(_resolve(path)) as fh:
        return json.load(fh)


def load_cq_channel(path: str) -> CqChannel:
    return CqChannel.from_json(_load(path))


def load_source(path: str) -> Ensemble:
    return Ensemble.from_json(_load(path))


def load_mac(path: str) -> MacChannel:
    data = _load(path)
    outs = {tuple(e["input"]): matrix_from_json(e["state"]) for e in data["outputs"]}
    return MacChannel(data["alphabet_sizes"], outs)


def cmd_entropy(args) -> tuple:
    ens = load_source(args.source)
    rho = ens.average()
    rows = [("H(average)", von_neumann_entropy(rho))]
    if len(ens.dims) > 1:
        m = MultipartiteState(rho, ens.dims)
        for i, label in enumerate(m.labels):
            rows.append((f"H({label})", subsystem_entropy(m, [i])))
    if args.channel:
        W = load_cq_channel(args.channel)
        P = _floats(args.P) if args.P else [1 / W.alphabet_size] * W.alphabet_size
        rows.append(("I(P;W)", holevo_information(P, W)))
    return _table(["quantity", "value"], rows), 0


def cmd_compress(args) -> tuple:
    ens = load_source(args.source)
    rho = ens.average()
    rows = []
    for n in _ints(args.n):
        for alpha in _floats(args.alpha):
            scheme = schumacher_scheme(rho, n, alpha)
            F, D, Fe = scheme_fidelities(scheme, ens)
            rows.append((n, alpha, scheme.rate, F, D, Fe,
                         schumacher_fidelity_bound(rho, alpha), schumacher_rate_bound(rho, n, alpha)))
    bad = [r for r in rows if r[5] < r[6] - 1e-9 or r[2] > r[7] + 1e-9]
    return _table(["n", "alpha", "rate", "F_bar", "D_bar", "F_e", "bound_Fe", "bound_rate"], rows), int(bool(bad))


def cmd_channel_code(args) -> tuple:
    W = load_cq_channel(args.channel)
    rows = []
    codes = []
    status = 0
    for n in _ints(args.n):
        if args.type:
            counts = list(TypeVector.parse(args.type).counts)
            if sum(counts) != n:
                total = sum(counts)
                counts = [round(c * n / total) for c in counts]
                counts[-1] = n - sum(counts[:-1])
            P = TypeVector(tuple(counts))
        else:
            P = None
        if args.mode == "cc":
            if P is None:
                raise ConfigError("--mode cc needs --type")
            code = constant_composition_code(W, P, lam=args.lam)
        else:
            dist = P.distribution() if P is not None else [1 / W.alphabet_size] * W.alphabet_size
            code = greedy_maximal_code(BlockCqChannel.stationary(W, n), dist, lam=args.lam)
        ch = BlockCqChannel.stationary(W, n)
        emax = error_probability(code, ch, "max") if code.size else 0.0
        eavg = error_probability(code, ch, "avg") if code.size else 0.0
        bound = code_rate_bound(W, code, args.lam) if code.size else math.nan
        log_size = math.log2(code.size) if code.size else -math.inf
        if emax > args.lam + 1e-9 or (code.size and log_size > bound + 1e-9):
            status = 1
        rows.append((n, args.mode, code.size, code.rate if code.size else 0.0, emax, eavg, log_size, bound))
        codes.append(code.to_json())
    if args.code_out:
        Path(args.code_out).write_text(json.dumps(codes, indent=1) + "\n")
    return _table(["n", "mode", "size", "rate", "max_error", "avg_error", "log2_size", "converse_log2_bound"],
                  rows), status


def cmd_capacity(args) -> tuple:
    W = load_cq_channel(args.channel)
    res = optimize_holevo(W, tol=args.tol, max_iter=args.max_iter)
    header = ["capacity", "gap", "iterations", "converged"] + [f"P{x}" for x in range(W.alphabet_size)]
    row = [res.capacity, res.gap, res.iterations, res.converged] + list(res.distribution)
    return _table(header, [row]), 0 if res.converged else 1


def cmd_mac_region(args) -> tuple:
    mac = load_mac(args.mac)
    if args.inputs:
        Ps = [_floats(part) for part in args.inputs.split(";")]
    else:
        Ps = [[1 / a] * a for a in mac.alphabet_sizes]
    poly = mac_outer_region(mac, Ps)
    if args.format == "json":
        return json.dumps(poly.to_json(), indent=1, sort_keys=True) + "\n", 0
    corners = all_corner_points(poly) if poly.s <= 3 else []
    status = int(any(not poly.contains(c) for c in corners))
    return poly.corners_csv(corners), status


def cmd_reliability(args) -> tuple:
    W = load_cq_channel(args.channel)
    P = _floats(args.P) if args.P else [1 / W.alphabet_size] * W.alphabet_size
    rows = []
    I = holevo_information(P, W)
    for R in _floats(args.rates):
        sp = sphere_packing_point(W, P, R)
        g = greedy_exponent_point(W, P, R)
        rows.append((R, I, sp.value, g.value, sp.upper_estimate))
    status = int(any(r[3] > r[2] + 1e-6 for r in rows))
    return _table(["R", "I", "E_sp", "E_g", "upper_estimate"], rows), status


def cmd_verify(args) -> tuple:
    rows = run_suite(args.suite, args.trials, args.seed)
    rows = [r for r in rows if r.trials]
    status = int(any(r.max_violation > args.tol for r in rows))
    table = _table(["suite", "inequality", "trials", "min_slack", "max_violation"],
                   [(r.suite, r.inequality, r.trials, r.min_slack, r.max_violation) for r in rows])
    return table, status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qshannon", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", help="output file (default: stdout)")
        p.set_defaults(func=fn)
        return p

    p = add("entropy", cmd_entropy, "entropies of a source's average state")
    p.add_argument("--source", required=True)
    p.add_argument("--channel")
    p.add_argument("--P")

    p = add("compress", cmd_compress, "typical-subspace compression table")
    p.add_argument("--source", required=True)
    p.add_argument("--n", required=True, help="comma-separated block lengths")
    p.add_argument("--alpha", default="4")

    p = add("channel-code", cmd_channel_code, "greedy or constant-composition code construction")
    p.add_argument("--channel", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--mode", choices=("greedy", "cc"), default="greedy")
    p.add_argument("--type", help="letter counts such as '4:4', rescaled to each n")
    p.add_argument("--code-out", help="write the constructed codes as JSON")

    p = add("capacity", cmd_capacity, "Holevo capacity by multiplicative updates")
    p.add_argument("--channel", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100_000)

    p = add("mac-region", cmd_mac_region, "multiple-access outer bound and its corners")
    p.add_argument("--mac", required=True)
    p.add_argument("--inputs", help="per-sender distributions, e.g. '0.5,0.5;0.5,0.5'")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("reliability", cmd_reliability, "sphere-packing and greedy exponents")
    p.add_argument("--channel", required=True)
    p.add_argument("--P")
    p.add_argument("--rates", required=True)

    p = add("verify", cmd_verify, "randomised inequality suites")
    p.add_argument("--suite", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, status = args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except QShannonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status
