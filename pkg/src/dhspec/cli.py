"""Command-line front end.

Every artifact carries the tool version and the fully resolved configuration;
nothing time- or host-dependent is written, so identical flags give
identical bytes.  Exit codes: 0 success, 1 verification or run failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .exactpoly import MultiPoly, apply_HE, apply_HI
from .functionals import FAMILIES, default_rule, gradE_gnorm, relation_terms, test_family
from .profiles import barenblatt, derive_constants, profile_mass_exact
from .spectra import (EigenIndex, crossing, eigen_indices, eigenfunction, lambda_eig, mu_eig,
                      spectrum_table)
from .weighted import build_rule, divergence_form_HE, gram, poincare_ratio

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Invalid flag values (exit code 2)."""


class VerificationFailure(Exception):
    """A check ran and failed (exit code 1)."""


# ---- flag parsing -----------------------------------------------------------

def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r} (use p/q or a decimal)")


def exponent(text: str) -> Fraction:
    m = rational(text)
    if m < 1:
        raise argparse.ArgumentTypeError(f"m must satisfy m >= 1, got {m}")
    return m


def dimension(text: str) -> int:
    try:
        N = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer, got {text!r}")
    if N < 1:
        raise argparse.ArgumentTypeError(f"N must be positive, got {N}")
    return N


def pair(text: str):
    try:
        l, k = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'l,k', got {text!r}")
    return l, k


def mode_flag(text: str):
    """``l=<l>,k=<k>`` (or plain ``l,k``)."""
    parts = dict(p.split("=", 1) if "=" in p else (None, p) for p in text.split(","))
    try:
        if None in parts:
            return pair(text)
        return int(parts["l"]), int(parts["k"])
    except (KeyError, ValueError):
        raise argparse.ArgumentTypeError(f"expected 'l=<l>,k=<k>', got {text!r}")


def window_flag(text: str):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 't0,t1', got {text!r}")
    if not a < b:
        raise argparse.ArgumentTypeError("window needs t0 < t1")
    return a, b


# ---- output -----------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _config(args) -> dict:
    skip = {"func", "format", "out"}
    return _jsonable({k: v for k, v in sorted(vars(args).items()) if k not in skip})


def _header(args, **extra) -> dict:
    return {"tool": "dhspec", "version": __version__, "command": args.command, "config": _config(args), **_jsonable(extra)}


def _emit(args, payload: dict, table: Optional[List[dict]] = None, columns: Optional[Sequence[str]] = None):
    if getattr(args, "format", "json") == "csv" and table is not None:
        buf = io.StringIO()
        head = {k: v for k, v in payload.items() if k != "rows"}
        buf.write("# " + json.dumps(_jsonable(head), sort_keys=True) + "\n")
        cols = list(columns or (table[0].keys() if table else []))
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in table:
            w.writerow({k: _cell(v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


# ---- commands -----------------------------------------------------------------

def cmd_spectrum(args):
    rows = [e.to_dict() for e in spectrum_table(args.m, args.N, args.max_degree)]
    payload = {**_header(args), "rows": rows}
    _emit(args, payload, rows, ["l", "k", "lambda", "mu", "multiplicity", "degree"])
    return 0


def cmd_eigenfunction(args):
    idx = EigenIndex(args.l, args.n, args.k)
    psi = eigenfunction(idx, args.m, args.N)
    he = apply_HE(psi, args.m, args.N)
    lam = lambda_eig(args.l, args.k, args.m, args.N)
    exact = he == psi * lam
    payload = {**_header(args), "polynomial": psi.to_text(), "degree": psi.degree,
               "lambda": lam, "mu": mu_eig(args.l, args.k, args.m, args.N), "eigen_relation_exact": exact}
    _emit(args, payload)
    return 0 if exact else 1


def _verify_eigen(args):
    cases = []
    for idx in eigen_indices(args.N, args.max_degree):
        if idx.l + 2 * idx.k == 0:
            continue
        psi = eigenfunction(idx, args.m, args.N)
        lam = lambda_eig(idx.l, idx.k, args.m, args.N)
        mu = mu_eig(idx.l, idx.k, args.m, args.N)
        rE = apply_HE(psi, args.m, args.N) - psi * lam
        rI = apply_HI(psi, args.m, args.N) - psi * mu
        cases.append({"l": idx.l, "n": idx.n, "k": idx.k, "lambda": lam, "mu": mu,
                      "residual_HE": rE.to_text(), "residual_HI": rI.to_text(),
                      "pass": rE.is_zero() and rI.is_zero()})
    return cases, {"exact": True}


def _verify_relation(args):
    rule = default_rule(args.m, args.N)
    fam = test_family(args.m, args.N, args.family, args.samples, args.seed, rule=rule)
    cases = []
    for d in fam:
        t = relation_terms(d, args.m, args.N, rule)
        cases.append({"name": d.name, **{k: t[k] for k in ("E", "I", "gnorm", "lhs", "rhs")},
                      "residual": t["residual"], "pass": t["residual"] <= args.tol})
    return cases, {"rule_nodes": len(rule), "family_size": len(fam)}


def _verify_operator(args):
    rule = build_rule(args.m, args.N, args.radial_order, args.angular_order)
    cases = []
    for idx in eigen_indices(args.N, args.max_degree):
        if idx.l + 2 * idx.k == 0:
            continue
        psi = eigenfunction(idx, args.m, args.N)
        explicit = apply_HE(psi, args.m, args.N).evaluate(rule.nodes)
        div = divergence_form_HE(psi, rule.nodes, args.m)
        err = float(np.max(np.abs(div - explicit)))
        cases.append({"l": idx.l, "n": idx.n, "k": idx.k, "max_abs_error": err, "pass": err <= args.tol})
    return cases, {"rule_nodes": len(rule), "radial_order": args.radial_order, "angular_order": args.angular_order}


def _eigen_basis(args):
    idxs = [i for i in eigen_indices(args.N, args.max_degree) if i.l + 2 * i.k > 0]
    return idxs, [eigenfunction(i, args.m, args.N) for i in idxs]


def _verify_orthogonality(args):
    idxs, basis = _eigen_basis(args)
    rule = build_rule(args.m, args.N, args.radial_order, args.angular_order)
    G = gram(basis, rule, args.m, args.N)
    GE = gram(basis, rule, args.m, args.N, "HE")
    GI = gram(basis, rule, args.m, args.N, "HI")
    GE2 = gram(basis, rule, args.m, args.N, "HE2")
    a = float(args.N * (args.m - 1))
    scale = np.sqrt(np.outer(np.diag(G), np.diag(G)))
    off = np.abs(G - np.diag(np.diag(G))) / scale
    ident = np.abs(GI - (GE2 + a * GE) / (1 + a)) / scale
    # second route to the squared operator, valid because H_E keeps each degree space
    route = np.abs(GE @ np.linalg.solve(G, GE) - GE2) / scale
    sym = max(float(np.max(np.abs(M - M.T) / scale)) for M in (GE, GI))
    lam = np.array([float(lambda_eig(i.l, i.k, args.m, args.N)) for i in idxs])
    diagE = float(np.max(np.abs(np.diag(GE) - lam * np.diag(G)) / np.diag(G)))
    checks = {
        "gram_offdiag": float(off.max()),
        "operator_identity": float(ident.max()),
        "squared_operator_routes": float(route.max()),
        "symmetry": sym,
        "diagonal_eigen": diagE,
    }
    cases = [{"check": k, "value": v, "pass": v <= args.tol} for k, v in checks.items()]
    cases.append({"check": "positive_semidefinite", "value": float(min(np.linalg.eigvalsh((GE + GE.T) / 2).min(),
                                                                      np.linalg.eigvalsh((GI + GI.T) / 2).min())),
                  "pass": bool(np.linalg.eigvalsh((GE + GE.T) / 2).min() > -args.tol * np.abs(GE).max()
                               and np.linalg.eigvalsh((GI + GI.T) / 2).min() > -args.tol * np.abs(GI).max())})
    return cases, {"basis_size": len(basis), "rule_nodes": len(rule)}


def _verify_poincare(args):
    idxs, basis = _eigen_basis(args)
    rule = build_rule(args.m, args.N, args.radial_order, args.angular_order)
    cases = []
    for i, psi in zip(idxs, basis):
        r = poincare_ratio(psi, rule, args.m, args.N)
        cases.append({"l": i.l, "n": i.n, "k": i.k, "ratio": r, "pass": math.isfinite(r) and r <= args.bound})
    return cases, {"bound": args.bound, "rule_nodes": len(rule)}


VERIFY = {
    "eigen": _verify_eigen,
    "relation": _verify_relation,
    "operator": _verify_operator,
    "orthogonality": _verify_orthogonality,
    "poincare": _verify_poincare,
}


def cmd_verify(args):
    cases, info = VERIFY[args.target](args)
    ok = all(c["pass"] for c in cases)
    payload = {**_header(args, **info), "target": args.target, "pass": ok,
               "failed": sum(not c["pass"] for c in cases), "rows": cases}
    _emit(args, payload, cases)
    return 0 if ok else 1


def cmd_crossings(args):
    results = []
    for a, b in args.pairs:
        cs = crossing(a, b, args.N, strict=not args.allow_formal)
        results.append({"pair_a": {"l": a[0], "k": a[1]}, "pair_b": {"l": b[0], "k": b[1]},
                        "everywhere": cs.everywhere,
                        "points": [str(p) if isinstance(p, Fraction) else p for p in cs.points],
                        "exact": all(isinstance(p, Fraction) for p in cs.points)})
    _emit(args, {**_header(args), "rows": results})
    return 0


def _exact_profile(m: Fraction, r: Fraction):
    if m == 1 or (1 / (m - 1)).denominator != 1:
        return None
    base = (m - 1) / (2 * m) * max(1 - r * r, Fraction(0))
    return base ** int(1 / (m - 1))


def cmd_profile(args):
    if args.at:
        radii = [abs(r) for r in args.at]
    else:
        radii = [Fraction(i, args.points - 1) * args.rmax for i in range(args.points)]
    rows = []
    for r in radii:
        exact = _exact_profile(args.m, r)
        row = {"r": float(r), "v": barenblatt(float(r), args.m)}
        if exact is not None:
            row["exact"] = str(exact)
        rows.append(row)
    params = derive_constants(args.m, args.N).to_dict()
    params["profile_mass"] = profile_mass_exact(args.m, args.N)
    payload = {**_header(args), "params": params, "rows": rows}
    cols = ["r", "v"] + (["exact"] if rows and "exact" in rows[0] else [])
    _emit(args, payload, rows, cols)
    return 0


def cmd_simulate(args):
    from .evolve.simulate import SimConfig, run_simulation, write_csv

    cfg = SimConfig(eq=args.eq, m=str(args.m), mode=args.mode, eps=args.eps, grid=args.grid, L=args.L,
                    dt=args.dt, tmax=args.tmax, every=args.every, window=args.window)
    res = run_simulation(cfg)
    header = {"tool": "dhspec", "version": __version__, "command": "simulate", "config": res["config"],
              "grid": res["grid"], "summary": res["summary"]}
    text = write_csv(res, header) if args.format == "csv" or args.out else json.dumps(
        _jsonable({**header, "rows": res["rows"]}), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        sys.stdout.write(json.dumps(_jsonable({k: header[k] for k in ("config", "grid", "summary")}), indent=2) + "\n")
    else:
        sys.stdout.write(text)
    return 0


def cmd_rate(args):
    from .evolve.grid import fit_decay_rate
    from .evolve.simulate import read_csv

    with open(args.input, encoding="utf-8") as fh:
        header, rows = read_csv(fh.read())
    if args.column not in rows[0]:
        raise UsageError(f"column {args.column!r} not in CSV (have {sorted(rows[0])})")
    window = args.window or tuple(header.get("config", {}).get("window", (1.0, 4.0)))
    rate, r2 = fit_decay_rate([(r["t"], abs(r[args.column])) for r in rows], window)
    payload = {"tool": "dhspec", "version": __version__, "command": "rate", "source": header.get("config"),
               "column": args.column, "rate": rate, "r2": r2, "window": list(window)}
    if args.expect is not None:
        payload["expect"] = args.expect
        payload["rtol"] = args.rtol
        payload["pass"] = abs(rate - args.expect) <= args.rtol * abs(args.expect)
    _emit(args, payload)
    return 0 if payload.get("pass", True) else 1


# ---- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dhspec", description="Displacement-Hessian spectra at Barenblatt profiles.")
    p.add_argument("--version", action="version", version=f"dhspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, m=True, N=True, fmt=True):
        if m:
            sp.add_argument("--m", type=exponent, required=True, help="exponent m >= 1 (p/q or decimal)")
        if N:
            sp.add_argument("--N", type=dimension, default=1, help="space dimension (default 1)")
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default="json")
            sp.add_argument("--out", help="write the artifact to this path instead of stdout")

    sp = sub.add_parser("spectrum", help="sorted table of (l, k, lambda, mu, multiplicity)")
    common(sp)
    sp.add_argument("--max-degree", type=int, default=6)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("eigenfunction", help="print an eigenfunction and check it exactly")
    common(sp)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_eigenfunction)

    sp = sub.add_parser("verify", help="run a verification suite; exit 1 on failure")
    sp.add_argument("target", choices=sorted(VERIFY))
    common(sp)
    sp.add_argument("--max-degree", type=int, default=6)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--family", choices=FAMILIES, default="all")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--radial-order", type=int, default=12)
    sp.add_argument("--angular-order", type=int, default=12)
    sp.add_argument("--bound", type=float, default=10.0, help="poincare: largest accepted ratio")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("crossings", help="exact m at which two mu-branches meet")
    sp.add_argument("--pairs", required=True, help="'l,k:l,k' items separated by ';'")
    common(sp, m=False)
    sp.add_argument("--allow-formal", action="store_true", help="accept indices invalid for this N")
    sp.set_defaults(func=cmd_crossings)

    sp = sub.add_parser("profile", help="Barenblatt profile values and constants")
    common(sp)
    sp.add_argument("--at", type=rational, nargs="+", help="radii to evaluate")
    sp.add_argument("--rmax", type=rational, default=Fraction(3, 2))
    sp.add_argument("--points", type=int, default=31)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("simulate", help="1D perturbation run of the confined flows")
    sp.add_argument("--eq", choices=("pme", "fourth"), required=True)
    common(sp, N=False)
    sp.add_argument("--mode", type=mode_flag, default=(1, 0), help="l=<l>,k=<k> (default l=1,k=0)")
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--grid", type=int, default=None, help="node count (default per m)")
    sp.add_argument("--L", type=float, default=None, help="half-width of the domain")
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--tmax", type=float, default=4.0)
    sp.add_argument("--every", type=float, default=0.05, help="recording interval")
    sp.add_argument("--window", type=window_flag, default=(1.0, 4.0))
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("rate", help="fit a decay rate to a simulate CSV")
    sp.add_argument("input", help="CSV written by simulate")
    sp.add_argument("--column", default="wasserstein")
    sp.add_argument("--window", type=window_flag, default=None)
    sp.add_argument("--expect", type=float, default=None)
    sp.add_argument("--rtol", type=float, default=0.1)
    sp.add_argument("--format", choices=("json",), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rate)
    return p


_DEFAULT_TOL = {"eigen": 0.0, "relation": 1e-8, "operator": 1e-8, "orthogonality": 1e-10, "poincare": 0.0}


def _postprocess(args, parser):
    if args.command == "verify":
        if args.tol is None:
            args.tol = _DEFAULT_TOL[args.target]
        if args.max_degree < 1:
            parser.error("--max-degree must be at least 1")
        if args.target == "relation" and args.samples < 1:
            parser.error("--samples must be positive")
    if args.command == "spectrum" and args.max_degree < 1:
        parser.error("--max-degree must be at least 1")
    if args.command == "crossings":
        try:
            args.pairs = [tuple(pair(s) for s in item.split(":")) for item in args.pairs.split(";")]
            if any(len(t) != 2 for t in args.pairs):
                raise argparse.ArgumentTypeError("each item needs two pairs")
        except argparse.ArgumentTypeError as exc:
            parser.error(f"--pairs: {exc}")
    if args.command == "profile" and args.points < 2:
        parser.error("--points must be at least 2")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _postprocess(args, parser)
    try:
        return args.func(args)
    except (UsageError, ValueError, NotImplementedError) as exc:
        sys.stderr.write(f"dhspec {args.command}: error: {exc}\n")
        return 2
    except VerificationFailure as exc:
        sys.stderr.write(f"dhspec {args.command}: verification failed: {exc}\n")
        return 1
    except RuntimeError as exc:
        sys.stderr.write(f"dhspec {args.command}: run failed: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
