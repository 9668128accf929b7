"""Command line front end.

Exit codes: 0 when every selected check passes, 1 when a check fails or a
computation breaks down, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Callable, Optional

import numpy as np

from .errors import InputError, NLFTError
from .forward_nlft import (
    apply_symmetry,
    conjugate_sequence,
    degree_law_report,
    expansion_partial_sum,
    modulate_sequence,
    nlft_finite,
    plancherel_check,
    reflect_sequence,
    shift_sequence,
    sum_rules,
)
from .inverse_nlft import POLICIES, invert_full_line, layer_strip_finite, retransform_deviation
from .jacobi_bridge import jacobi_from_F, jacobi_m_check, jacobi_oracle
from .laurent_core import LaurentPolynomial, RationalFunction
from .opuc_bridge import (
    gram_schmidt_oracle,
    hessenberg_entries,
    measure_density_finite,
    orthogonal_polys,
    szego_check,
)
from .riemann_hilbert import (
    PoleParameters,
    classify_poles,
    reconstruction_deviation,
    rh_contraction_bounded,
    shared_pole_factorization,
    triple_factorization_rational,
)
from .spectral_factorization import a_from_b_laurent, a_from_b_rational
from .su11_pairs import CoefficientSequence, SU11Pair, random_batch

log = logging.getLogger("nlft")


class MalformedInput(Exception):
    """Input that cannot be parsed into the expected object."""


# -- I/O ---------------------------------------------------------------------

def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _write_json(path: Optional[str], data) -> None:
    text = json.dumps(data, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _load(path: str, loader: Callable):
    data = _read_json(path)
    try:
        return loader(data)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


def _load_function(data: dict):
    if "num" in data:
        return RationalFunction.from_json(data)
    if "lo" in data or "coeffs" in data:
        return LaurentPolynomial.from_json(data)
    raise MalformedInput("expected a Laurent polynomial {lo, coeffs} or rational {num, den}")


def _poly_json(p: LaurentPolynomial) -> list:
    return [[c.real, c.imag] for c in p.dense(0, p.hi)]


# -- checks --------------------------------------------------------------------

def _laurent_gap(p: SU11Pair, q: SU11Pair) -> float:
    """Largest coefficient difference, relative to the largest coefficient when that exceeds 1."""
    gaps, scale = [], 1.0
    for x, y in ((p.a, q.a), (p.b, q.b)):
        d = x - y
        gaps.append(float(np.max(np.abs(d.coeffs))) if not d.is_zero() else 0.0)
        scale = max(scale, float(np.max(np.abs(x.coeffs), initial=0.0)))
    return max(gaps) / scale


def _half_line(F: CoefficientSequence) -> CoefficientSequence:
    return CoefficientSequence(1, F.values)


def check_plancherel(F):
    lhs, rhs = plancherel_check(F)
    return abs(lhs - rhs)


def check_sumrules(F):
    return sum_rules(F).max_deviation()


def check_degrees(F):
    report = degree_law_report(F)
    if not (report["b_band_ok"] and report["a_band_ok"]):
        return np.inf
    return report["a0_deviation"]


def check_symmetries(F):
    p = nlft_finite(F)
    c = np.exp(0.7j)
    pairs = [
        (nlft_finite(shift_sequence(F)), apply_symmetry(p, "shift")),
        (nlft_finite(modulate_sequence(F, c)), apply_symmetry(p, "modulate", c)),
        (nlft_finite(reflect_sequence(F)), apply_symmetry(p, "reflect")),
        (nlft_finite(conjugate_sequence(F)), apply_symmetry(p, "conjugate")),
    ]
    return max(_laurent_gap(x, y) for x, y in pairs)


def check_roundtrip(F):
    G = layer_strip_finite(nlft_finite(F))
    lo, hi = F.start, F.stop - 1
    if G.support() is not None:
        lo, hi = min(lo, G.start), max(hi, G.stop - 1)
    return float(np.max(np.abs(G.restrict(lo, hi).values - F.restrict(lo, hi).values)))


def check_expansion(F):
    return expansion_partial_sum(F, len(F)).max_deviation


def check_norm(F):
    p = nlft_finite(F)
    z = np.exp(2j * np.pi * np.random.default_rng(len(F)).uniform(size=64))
    a, b = np.abs(p.a(z)), np.abs(p.b(z))
    return float(np.max(np.abs(a + b - np.exp(np.arccosh(np.maximum(a, 1.0))))))


def check_szego(F):
    report = szego_check(_half_line(F), 32)
    return max(abs(report.lhs - report.product), abs(report.rhs - report.product))


def check_opuc(F):
    H = _half_line(F)
    N = len(F) + 1
    band = hessenberg_entries(H, N)
    oracle = gram_schmidt_oracle(measure_density_finite(H), N).band(N)
    return float(max(np.max(np.abs(band.diag - oracle.diag)),
                     np.max(np.abs(band.subdiag - oracle.subdiag), initial=0.0)))


def check_jacobi(F):
    H = CoefficientSequence(1, F.values.real)
    N = len(F) // 2 + 2
    J = jacobi_from_F(H, N)
    O = jacobi_oracle(H, N).matrix
    return float(max(np.max(np.abs(J.diag - O.diag)), np.max(np.abs(J.offdiag - O.offdiag))))


CHECKS = {
    "plancherel": (check_plancherel, 1e-9),
    "sumrules": (check_sumrules, 1e-8),
    "degrees": (check_degrees, 1e-10),
    "symmetries": (check_symmetries, 1e-12),
    "roundtrip": (check_roundtrip, 1e-9),
    "expansion": (check_expansion, 1e-12),
    "norm": (check_norm, 1e-12),
    "szego": (check_szego, 1e-8),
    "opuc": (check_opuc, 1e-7),
    "jacobi": (check_jacobi, 1e-6),
}


def run_checks(batch: list, names: list) -> list:
    report = []
    for name in names:
        fn, tol = CHECKS[name]
        worst = 0.0
        for F in batch:
            worst = max(worst, float(fn(F)))
        report.append({"check": name, "max_dev": worst, "tol": tol, "pass": bool(worst < tol)})
    return report


# -- subcommands ---------------------------------------------------------------

def cmd_transform(args) -> int:
    F = _load(args.inp, CoefficientSequence.from_json)
    p = nlft_finite(F)
    _write_json(args.out, p.as_grid(args.grid).to_json() if args.grid else p.to_json())
    if args.verify:
        names = _split(args.verify)
        report = run_checks([F], names)
        _write_json(None, report)
        return 0 if all(r["pass"] for r in report) else 1
    return 0


def cmd_invert(args) -> int:
    p = _load(args.inp, SU11Pair.from_json)
    inv = invert_full_line(p, steps=args.steps, policy=args.factor_policy)
    out = inv.sequence.to_json()
    out["policy"] = inv.policy
    if p.kind == "rational":
        out["retransform_deviation"] = retransform_deviation(inv, p)
        out["truncation_deviation"] = retransform_deviation(inv, p, with_tails=False)
    _write_json(args.out, out)
    return 0


def cmd_factor(args) -> int:
    p = _load(args.inp, SU11Pair.from_json)
    if args.mode == "bounded":
        f = rh_contraction_bounded(p)
    elif args.mode == "rational":
        f = triple_factorization_rational(p)
    else:
        if not args.params:
            raise MalformedInput("--mode shared needs --params")
        raw = _read_json(args.params)
        try:
            params = [PoleParameters.from_json(d) if "n" in d else d for d in raw]
            table = {}
            for entry in params:
                if isinstance(entry, PoleParameters):
                    loc, np_, nm, mp, mm = (entry.location, entry.n_plus, entry.n_minus,
                                            entry.mu_plus, entry.mu_minus)
                else:
                    loc = complex(*entry["location"])
                    np_, nm = int(entry["n_plus"]), int(entry["n_minus"])
                    mp, mm = entry.get("mu_plus"), entry.get("mu_minus")
                table[loc] = (np_, nm) if mp is None else (np_, nm, float(mp), float(mm))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"{args.params}: {exc}") from exc
        f = shared_pole_factorization(p, table)
        f = type(f)(f.left, f.right, f.middle, tuple(classify_poles(f, p)), f.diagnostics)
    out = f.to_json()
    if p.kind != "grid":
        out["reconstruction_deviation"] = reconstruction_deviation(f, p)
    out["energies"] = f.energies()
    _write_json(args.out, out)
    return 0


def cmd_factor_ab(args) -> int:
    b = _load(args.b, _load_function)
    if args.rational or isinstance(b, RationalFunction):
        a = a_from_b_rational(b if isinstance(b, RationalFunction) else b.to_rational())
    else:
        a = a_from_b_laurent(b)
    _write_json(args.out, a.to_json())
    return 0


def cmd_opuc(args) -> int:
    F = _load(args.inp, CoefficientSequence.from_json)
    w = measure_density_finite(F)
    band = hessenberg_entries(F, args.n)
    oracle = gram_schmidt_oracle(w, args.n)
    ob = oracle.band(args.n)
    dev = float(max(np.max(np.abs(band.diag - ob.diag), initial=0.0),
                    np.max(np.abs(band.subdiag - ob.subdiag), initial=0.0)))
    out = {"hessenberg": band.to_json(), "oracle": ob.to_json(), "max_dev": dev,
           "polynomials": [_poly_json(p) for p in orthogonal_polys(F, args.n)],
           "total_mass": w.total_mass, "grid_size": w.M}
    if args.szego:
        out["szego"] = szego_check(F, args.degree).to_json()
    if args.density:
        with open(args.density, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "value_re", "value_im"])
            writer.writerows(w.csv_rows())
    _write_json(args.out, out)
    return 0


def cmd_jacobi(args) -> int:
    F = _load(args.inp, CoefficientSequence.from_json)
    J = jacobi_from_F(F, args.n)
    oracle = jacobi_oracle(F, args.n).matrix
    out = {"jacobi": J.to_json(), "oracle": oracle.to_json(),
           "max_dev": float(max(np.max(np.abs(J.diag - oracle.diag), initial=0.0),
                                np.max(np.abs(J.offdiag - oracle.offdiag), initial=0.0)))}
    if args.mcheck:
        try:
            re, im = (float(x) for x in args.mcheck.split(","))
        except ValueError as exc:
            raise MalformedInput(f"--mcheck expects re,im: {exc}") from exc
        out["mcheck"] = jacobi_m_check(F, complex(re, im)).to_json()
    _write_json(args.out, out)
    return 0


def _split(text: str) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise MalformedInput(f"unknown checks {unknown}; choose from {sorted(CHECKS)}")
    return names


def cmd_verify(args) -> int:
    names = _split(args.checks) if args.checks else list(CHECKS)
    if args.inp:
        batch = [_load(args.inp, CoefficientSequence.from_json)]
    else:
        batch = random_batch(args.random, args.window, args.max_modulus, seed=args.seed)
    log.info("verify: %d sequences, seed %d, checks %s", len(batch), args.seed, ",".join(names))
    report = run_checks(batch, names)
    _write_json(args.out, {"seed": args.seed, "count": len(batch), "window": args.window,
                           "max_modulus": args.max_modulus, "checks": report})
    return 0 if all(r["pass"] for r in report) else 1


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlft", description="Nonlinear Fourier transform toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="forward transform of a sequence")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--grid", type=int)
    p.add_argument("--verify", help="comma-separated checks, e.g. plancherel,sumrules,degrees")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("invert", help="inverse transform of a pair")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--factor-policy", choices=POLICIES, default="min-right")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("factor", help="Riemann-Hilbert factorization of a pair")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--mode", choices=("bounded", "rational", "shared"), default="rational")
    p.add_argument("--params")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("factor-ab", help="recover a from b")
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.add_argument("--rational", action="store_true")
    p.set_defaults(func=cmd_factor_ab)

    p = sub.add_parser("opuc", help="orthogonal polynomials on the circle")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--out")
    p.add_argument("--szego", action="store_true")
    p.add_argument("--degree", type=int, default=32)
    p.add_argument("--density")
    p.set_defaults(func=cmd_opuc)

    p = sub.add_parser("jacobi", help="Jacobi matrix of a real sequence")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--out")
    p.add_argument("--mcheck", help="w as re,im")
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("verify", help="identity suite on a sequence or a random batch")
    p.add_argument("--in", dest="inp")
    p.add_argument("--random", type=int, default=100)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--max-modulus", type=float, default=0.9)
    p.add_argument("--checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (MalformedInput, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NLFTError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
