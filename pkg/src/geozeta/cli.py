"""Command-line front end: one JSON document per call (or CSV for tables)."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import analytic, forms, geodesics, heckezeta, periods
from .analytic import TruncationParams
from .forms import Form, FormError
from .periods import Kernel, QuadratureParams, parse_complex

DEFAULT_MAX_D = 500


# -- argument types (a ValueError/ArgumentTypeError here means exit code 2) --

def _form_arg(text: str) -> Form:
    try:
        return Form.parse(text)
    except (FormError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _disc_arg(text: str) -> int:
    try:
        D = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"discriminant must be an integer, got {text!r}") from None
    if not forms.is_valid_discriminant(D):
        raise argparse.ArgumentTypeError(
            f"{D} is not a valid discriminant (need D > 0 nonsquare, D = 0 or 1 mod 4)")
    return D


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


# -- serialization ----------------------------------------------------------

def _clean(obj):
    """Recursively convert to JSON-ready values, floats rounded to 15 digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.15g}") + 0.0
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, Form):
        return str(obj)
    if isinstance(obj, forms.UnimodularMatrix):
        return [list(r) for r in obj.rows()]
    if isinstance(obj, forms.QuadExact):
        return str(obj)
    return obj


def _dump(doc) -> str:
    return json.dumps(_clean(doc), separators=(",", ":"))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.15g}" if isinstance(v, float) else v for v in _clean(row)])
    return buf.getvalue()


# -- verbs ------------------------------------------------------------------

def _tp(args) -> TruncationParams:
    return TruncationParams(radius=args.radius)


def cmd_reduce(args):
    R, g, steps = forms.reduce(args.form)
    return {"reduced": R, "matrix": g, "steps": steps}


def cmd_cycle(args):
    cyc = forms.cycle_of(args.form)
    if args.csv:
        rows = [(i, str(Q), m) for i, (Q, m) in enumerate(zip(cyc.forms, cyc.quotients))]
        return _csv(["index", "form", "quotient"], rows)
    return {"forms": cyc.forms, "quotients": cyc.quotients, "length": len(cyc.forms),
            "matrix": cyc.matrix()}


def _class_record(D: int) -> dict:
    rec = {"D": D}
    if forms.is_fundamental_discriminant(D):
        t = forms.wide_class_table(D)
        rec.update(narrow=t.narrow_count, wide=t.wide_count, f=t.f, wide_pairs=t.wide_pairs)
    else:
        t = forms.narrow_classes(D)
        rec.update(narrow=t.narrow_count)
    rec["cycles"] = [{"first": c.forms[0], "length": len(c.forms)} for c in t.cycles]
    return rec


def cmd_classes(args):
    if args.disc is None and args.up_to is None:
        raise _Usage("classes needs --disc or --up-to")
    if args.disc is not None:
        recs = [_class_record(args.disc)]
    else:
        recs = [_class_record(D) for D in range(2, args.up_to + 1)
                if forms.is_valid_discriminant(D)]
    if args.csv:
        rows = [(r["D"], r["narrow"], r.get("wide", ""), r.get("f", ""),
                 " ".join(str(c["length"]) for c in r["cycles"])) for r in recs]
        return _csv(["D", "narrow", "wide", "f", "cycle_lengths"], rows)
    return recs[0] if args.disc is not None else {"classes": recs}


def cmd_pell(args):
    v, u = forms.pell_fundamental(args.disc)
    return {"v": v, "u": u, "epsilon": f"({v}+{u}*sqrt({args.disc}))/2"}


def cmd_unit(args):
    if not forms.is_fundamental_discriminant(args.disc):
        raise _Usage(f"{args.disc} is not a fundamental discriminant")
    eps, sign, f = forms.fundamental_unit(args.disc)
    return {"epsilon": eps.half_form(), "norm": sign, "f": f,
            "log_epsilon": math.log(float(eps))}


def cmd_eisenstein(args):
    ps = analytic.eisenstein(args.z, args.s, args.mode, _tp(args))
    return ps.to_dict()


def cmd_lift(args):
    ps = analytic.lift_series(args.form, args.z, args.s, _tp(args), args.mode)
    return ps.to_dict()


def cmd_period(args):
    K = Kernel.parse(args.kernel, _tp(args))
    qp = QuadratureParams(rel_tol=args.rel_tol) if args.rel_tol else None
    val = periods.hyperbolic_period(K, args.form, args.t0, qp, args.multiple)
    out = {"value": val, "normalized": -math.sqrt(args.form.D) * val}
    return out


def cmd_unit_product(args):
    if args.cycle_of is not None:
        if args.cycle_of.D != args.disc:
            raise _Usage("form discriminant does not match --disc")
        R, _, _ = forms.reduce(args.cycle_of)
        table = forms.narrow_classes(args.disc)
        idx = table.cycle_index(R)
    else:
        idx = args.cycle if args.cycle is not None else 0
    lhs, rhs, equal = periods.unit_product_identity(args.disc, idx)
    return {"equal": equal, "lhs": lhs.half_form(squarefree=True),
            "rhs": rhs.half_form(squarefree=True), "cycle": idx}


def cmd_phi_reg(args):
    ps = periods.phi_regularized(args.form, args.s, _tp(args))
    return ps.to_dict()


def cmd_hecke_verify(args):
    if not forms.is_fundamental_discriminant(args.disc):
        raise _Usage(f"{args.disc} is not a fundamental discriminant")
    idx = args.wide_class if args.wide_class is not None else 0
    if args.form is not None:
        if args.form.D != args.disc:
            raise _Usage("form discriminant does not match --disc")
        t = forms.wide_class_table(args.disc)
        R, _, _ = forms.reduce(args.form)
        k = t.cycle_index(R)
        idx = next(w for w, pair in enumerate(t.wide_pairs) if k in pair)
    qp = QuadratureParams(rel_tol=args.rel_tol)
    res = heckezeta.hecke_theorem_check(args.disc, idx, args.s, args.cutoff, qp, _tp(args))
    return res.to_dict()


def cmd_geodesic(args):
    P = geodesics.period_length(args.form)
    t1 = args.t1 if args.t1 is not None else args.t0 + P
    ts = np.linspace(args.t0, t1, args.samples)
    zs = geodesics.arc_points(args.form, ts)
    rows = [(float(t), float(z.real), float(z.imag)) for t, z in zip(ts, zs)]
    if args.csv:
        return _csv(["t", "re", "im"], rows)
    return {"rows": rows, "period": P}


class _Usage(Exception):
    pass


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--csv", action="store_true", help="CSV output for tables")
    common.add_argument("--max-D", type=_positive_int, default=DEFAULT_MAX_D, dest="max_D",
                        help="largest discriminant accepted (default 500)")

    p = argparse.ArgumentParser(prog="geozeta", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")

    def verb(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def series(sp, s_default="2"):
        sp.add_argument("--s", type=_complex_arg, default=_complex_arg(s_default))
        sp.add_argument("--radius", type=_positive_int, default=64)

    sp = verb("reduce", cmd_reduce, "reduce a form")
    sp.add_argument("--form", type=_form_arg, required=True)
    sp = verb("cycle", cmd_cycle, "cycle of reduced forms")
    sp.add_argument("--form", type=_form_arg, required=True)
    sp = verb("classes", cmd_classes, "narrow and wide class tables")
    sp.add_argument("--disc", type=_disc_arg)
    sp.add_argument("--up-to", type=_positive_int, dest="up_to")
    sp = verb("pell", cmd_pell, "fundamental solution of v^2 - D u^2 = 4")
    sp.add_argument("--disc", type=_disc_arg, required=True)
    sp = verb("unit", cmd_unit, "fundamental unit")
    sp.add_argument("--disc", type=_disc_arg, required=True)
    sp = verb("eisenstein", cmd_eisenstein, "Eisenstein series E(s, z)")
    sp.add_argument("--z", type=_complex_arg, required=True)
    sp.add_argument("--mode", choices=["lattice", "coprime"], default="lattice")
    series(sp)
    sp = verb("lift", cmd_lift, "holomorphic lift F_Q(s, z)")
    sp.add_argument("--form", type=_form_arg, required=True)
    sp.add_argument("--z", type=_complex_arg, required=True)
    sp.add_argument("--mode", choices=["lattice", "coprime"], default="lattice")
    series(sp)
    sp = verb("period", cmd_period, "hyperbolic period of a kernel")
    sp.add_argument("--form", type=_form_arg, required=True)
    sp.add_argument("--kernel", default="unit", help='"unit", "delta" or "lift:s=a+bi"')
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--multiple", type=_positive_int, default=1)
    sp.add_argument("--rel-tol", type=_positive_float, dest="rel_tol")
    sp.add_argument("--radius", type=_positive_int, default=64)
    sp = verb("unit-product", cmd_unit_product, "eps^2 against the product of x/x' over a cycle")
    sp.add_argument("--disc", type=_disc_arg, required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--cycle-of", type=_form_arg, dest="cycle_of")
    g.add_argument("--cycle", type=int)
    sp = verb("phi-reg", cmd_phi_reg, "regularized coset sum Phi_Q(s)")
    sp.add_argument("--form", type=_form_arg, required=True)
    series(sp)
    sp.set_defaults(radius=32)
    sp = verb("hecke-verify", cmd_hecke_verify, "check the period/zeta identity")
    sp.add_argument("--disc", type=_disc_arg, required=True)
    sp.add_argument("--cutoff", type=_positive_int, default=20000)
    sp.add_argument("--rel-tol", type=_positive_float, default=1e-6, dest="rel_tol")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--wide-class", type=int, dest="wide_class")
    g.add_argument("--form", type=_form_arg)
    series(sp)
    sp.set_defaults(radius=32)
    sp = verb("geodesic", cmd_geodesic, "sample points of C_Q")
    sp.add_argument("--form", type=_form_arg, required=True)
    sp.add_argument("--samples", type=_positive_int, default=50)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t1", type=float)
    return p


def _request(args) -> dict:
    req = {k: v for k, v in vars(args).items() if k not in ("func", "csv", "max_D") and v is not None}
    return _clean(req)


def _check_max_D(args, parser):
    D = getattr(args, "disc", None)
    if D is None and getattr(args, "form", None) is not None:
        D = args.form.D
    for val, label in ((D, "discriminant"), (getattr(args, "up_to", None), "--up-to")):
        if val is not None and val > args.max_D:
            parser.error(f"{label} {val} exceeds --max-D {args.max_D}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_max_D(args, parser)
    try:
        out = args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except (ArithmeticError, ValueError, RuntimeError, IndexError, KeyError) as exc:
        print(f"geozeta: error: {exc}", file=sys.stderr)
        return 1
    if isinstance(out, str):
        sys.stdout.write(out)
    else:
        doc = {"request": _request(args), **out}
        sys.stdout.write(_dump(doc) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
