"""Command-line front end.

Every run prints (or writes to ``--out``) a JSON envelope
``{"config": ..., "result": ...}`` whose config echoes all resolved options,
or CSV with a ``# config:`` comment line followed by a fixed header.
Exit status: 0 ok, 2 invalid input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import os
import sys
import tempfile
from fractions import Fraction
from importlib import resources

from . import constructions
from .analysis import (
    check_mu_injectivity,
    contracts_neighborhood_check,
    corollary41_diagnostic,
    entropy_birkhoff_mc,
    entropy_cylinder,
    entropy_exact,
    theorem36_certificate,
)
from .intervals import parse_partition
from .io import load_system, parse_measure
from .measures import MixtureMeasure, PwcDensity, SelfSimilarMeasure
from .rational import ResourceCapError, ValidationError, fmt_decimal, fmt_rat, parse_number
from .sds import cesaro_histogram, invariance_residual, residual_cells, simulate_orbit
from .ulam import build_ulam, stationary_distributions

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3

COMMANDS = ("simulate", "cesaro", "invariance", "entropy", "injectivity", "contraction", "certify", "diagnose", "ulam", "construct")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--system", default="builtin:example34", help="builtin:NAME[?p=P] or a system JSON file (default builtin:example34)")
    p.add_argument("--measure", default="lebesgue", help="lebesgue | uniform:LO,HI | atoms:(p,w);... | eta | nu1:p=P,depth=D | nu2:... | FILE")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed (default 0)")
    p.add_argument("--steps", type=int, default=10_000, help="orbit length / Monte Carlo budget (default 10000)")
    p.add_argument("--bins", type=int, default=10, help="histogram or Ulam bins (default 10)")
    p.add_argument("--depth", type=int, default=None, help="recursion / truncation / semigroup depth (command default)")
    p.add_argument("--tol", type=float, default=1e-12, help="numeric tolerance (default 1e-12)")
    p.add_argument("--grid", default="uniform", choices=("dyadic", "ternary", "uniform"), help="bin grid (default uniform)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--emit", default="json", choices=("json", "csv"), help="output format (default json)")
    p.add_argument("--p", default="3/5", help="Proposition parameter p in (1/2,1) (default 3/5)")
    p.add_argument("--x0", default=None, help="start or test point (command default)")
    p.add_argument("--eps", default="1/100", help="endpoint width or radius (default 1/100)")
    p.add_argument("--partition", default=None, help="dyadic:D | ternary:D | uniform:B (command default)")
    p.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--replicas", type=int, default=16, help="Monte Carlo replicas (default 16)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwlsds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    helps = {
        "simulate": "simulate one orbit",
        "cesaro": "Cesàro histogram of one orbit",
        "invariance": "max invariance residual over a partition",
        "entropy": "entropy of a measure (exact, cylinder or Monte Carlo)",
        "injectivity": "mean preimage count and μ-injectivity",
        "contraction": "neighbourhood contraction at x0",
        "certify": "uniqueness certificate (injectivity + contraction)",
        "diagnose": "five-bullet tightness/preimage diagnostic",
        "ulam": "Ulam matrix, closed classes, stationary laws",
        "construct": "build nu1 / nu2 / eta for the triple-tent system",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "construct":
            sp.add_argument("what", choices=("nu1", "nu2", "eta"))
            sp.add_argument("--check-invariance", action="store_true", help="also compute the invariance residual")
        if name == "ulam":
            sp.add_argument("--emit-matrix", action="store_true", help="include the exact matrix in the output")
    return parser


# ---------------------------------------------------------------------------
# output


def load_schema(name: str) -> dict:
    """Shipped JSON schema for a subcommand's output (or ``"system"`` for system files)."""
    return json.loads(resources.files("pwlsds").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8"))


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".pwlsds-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_json(config: dict, result: dict) -> str:
    return json.dumps({"config": config, "result": result}, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_csv(config: dict, header: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    buf.write("# config: " + json.dumps(config, ensure_ascii=False, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _clean(x):
    """Replace non-finite floats so the JSON stays strict."""
    if isinstance(x, float) and (x != x or x in (float("inf"), float("-inf"))):
        return None if x != x else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# commands


def _x0(args, default="1/2") -> Fraction:
    return parse_number(args.x0 if args.x0 is not None else default, field="x0")


def cmd_simulate(args, cfg):
    sys_ = load_system(args.system)
    x0 = _x0(args)
    cfg["x0"] = fmt_rat(x0)
    path = simulate_orbit(sys_, x0, args.steps, args.seed)
    states = path.as_float()
    rows = [[k, int(path.choices[k - 1]) if k else "", repr(float(states[k]))] for k in range(len(states))]
    result = {
        "steps": args.steps,
        "switch_step": path.switch_step,
        "exact_prefix": [fmt_rat(x) for x in path.exact_states[:64]],
        "choices": [int(c) for c in path.choices],
        "states_decimal": [float(x) for x in states],
        "final": float(states[-1]),
    }
    return result, (["k", "choice", "state"], rows)


def cmd_cesaro(args, cfg):
    sys_ = load_system(args.system)
    x0 = _x0(args)
    cfg["x0"] = fmt_rat(x0)
    h = cesaro_histogram(sys_, x0, args.steps, args.seed, args.bins)
    rows = [[fmt_rat(h.edges[i]), fmt_rat(h.edges[i + 1]), int(h.counts[i]), float(h.masses[i])] for i in range(args.bins)]
    return h.to_json(), (["bin_lo", "bin_hi", "count", "mass"], rows)


def cmd_invariance(args, cfg):
    sys_ = load_system(args.system)
    m = parse_measure(args.measure)
    part_spec = args.partition or "dyadic:4"
    cfg["partition"] = part_spec
    part = parse_partition(part_spec)
    r = invariance_residual(sys_, m, part, args.depth, args.workers)
    cells = residual_cells(sys_, m, part, args.depth)
    rows = [[fmt_rat(a), fmt_rat(b), fmt_rat(e.lo), fmt_rat(e.hi)] for (a, b), e in zip(part, cells)]
    result = {"residual": r.to_json(), "cells": [{"lo": a, "hi": b, "residual_lo": lo, "residual_hi": hi} for a, b, lo, hi in rows]}
    return result, (["cell_lo", "cell_hi", "residual_lo", "residual_hi"], rows)


def cmd_entropy(args, cfg):
    sys_ = load_system(args.system)
    m = parse_measure(args.measure)
    if isinstance(m, PwcDensity):
        rep = entropy_exact(sys_, m)
    elif isinstance(m, SelfSimilarMeasure):
        depth = 3 if args.depth is None else args.depth
        cfg["depth"] = depth
        rep = entropy_cylinder(sys_, m, depth)
    else:
        if isinstance(m, MixtureMeasure):
            m = m.normalized()
        rep = entropy_birkhoff_mc(sys_, m, args.steps, args.replicas, args.seed, workers=args.workers)
    out = rep.to_json()
    out["value_text"] = str(rep.symbolic) if rep.symbolic is not None else out["value"]
    rows = [[c["map"], c["lo"], c["hi"], c["mass"], c["d"]] for c in rep.cells]
    return out, (["map", "cell_lo", "cell_hi", "mass", "d"], rows)


def cmd_injectivity(args, cfg):
    rep = check_mu_injectivity(load_system(args.system))
    rows = [[fmt_rat(a), fmt_rat(b), fmt_rat(v)] for a, b, v in rep.count.cells()]
    return rep.to_json(), (["cell_lo", "cell_hi", "mean_preimages"], rows)


def cmd_contraction(args, cfg):
    x0 = _x0(args, "0")
    cfg["x0"] = fmt_rat(x0)
    c = contracts_neighborhood_check(load_system(args.system), x0)
    rows = [[w["map"], w["prob"], w["eps"]] for w in c.witnesses]
    return c.to_json(), (["map", "prob", "eps"], rows)


def cmd_certify(args, cfg):
    x0 = None if args.x0 is None else parse_number(args.x0, field="x0")
    cert = theorem36_certificate(load_system(args.system), parse_measure(args.measure), x0)
    return cert.to_json(), (["conclusion", "reason"], [[cert.conclusion, cert.reason]])


def cmd_diagnose(args, cfg):
    depth = 4 if args.depth is None else args.depth
    cfg["depth"] = depth
    rep = corollary41_diagnostic(load_system(args.system), depth, args.steps, args.seed)
    rows = [[b.id, b.name, b.status] for b in rep.bullets]
    return rep.to_json(), (["bullet", "name", "status"], rows)


def cmd_ulam(args, cfg):
    M = build_ulam(load_system(args.system), args.bins, args.grid)
    rep = stationary_distributions(M)
    out = rep.to_json()
    out["bins"], out["grid"] = M.bins, M.grid
    if args.emit_matrix:
        out["matrix"] = M.to_json()["entries"]
    rows = [[c, i, fmt_rat(v) if rep.exact else repr(float(v))] for c, d in enumerate(rep.distributions) for i, v in enumerate(d) if v != 0]
    return out, (["class", "bin", "mass"], rows)


def cmd_construct(args, cfg):
    p = parse_number(args.p, field="p")
    depth = 8 if args.depth is None else args.depth
    cfg["depth"] = depth
    result: dict = {"what": args.what}
    sys_ = constructions.prop42(p)
    if args.what == "eta":
        m = constructions.ETA
        result["tail"] = "0"
    else:
        w = constructions.CantorWeights(p, depth)
        m = constructions.build_nu1(p, depth) if args.what == "nu1" else constructions.build_nu2(p, depth)
        result["weights"] = w.to_json()
        result["identity_checks"] = {str(n): constructions.nu_bar_invariance_identity(n, p) for n in range(1, max(depth, 1) + 1)}
        result["tail"] = fmt_rat(w.tail)
    result["total_mass"] = m.total_mass().to_json()
    rows = []
    if args.check_invariance:
        part_spec = args.partition or "ternary:6"
        cfg["partition"] = part_spec
        r = invariance_residual(sys_, m, parse_partition(part_spec), workers=args.workers)
        bound = 2 * Fraction(result["tail"]) if args.what != "eta" else Fraction(0)
        result["residual"] = r.to_json()
        result["residual_bound"] = fmt_rat(bound)
        result["residual_within_bound"] = r.hi <= bound if args.what != "eta" else r.hi <= Fraction(1, 2**40)
        rows.append(["residual", fmt_rat(r.lo), fmt_rat(r.hi), fmt_rat(bound)])
    return result, (["quantity", "lo", "hi", "bound"], rows)


HANDLERS = {name: globals()["cmd_" + name] for name in COMMANDS}


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["tol"] = fmt_decimal(args.tol)
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    cfg = resolved_config(args)
    try:
        result, (header, rows) = HANDLERS[args.command](args, cfg)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, ValueError) as exc:
        # library-level domain errors (bad bins, IFS mismatch, ...) count as invalid input
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = _clean(result)
    text = render_json(cfg, result) if args.emit == "json" else render_csv(cfg, header, rows)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.command == "injectivity" and args.emit == "json" and not args.out:
        print(result["summary"], file=sys.stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
