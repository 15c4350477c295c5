"""Command-line entry point: ``nlcharge <subcommand> [options]``.

Every subcommand prints (or writes with ``--out``) a JSON report, except
``cothscan`` which writes one CSV per |q| panel.  Exit status is 0 when all
checks pass, 1 when a named tolerance check fails and 2 for invalid input.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dalg, nonclass, resolve, states
from .deform import DeformationSpec
from .fock import expect, sector_op

__all__ = ["main", "build_parser", "parse_int_list", "parse_q_range"]


class UsageError(ValueError):
    pass


# --- argument parsing helpers -------------------------------------------

def parse_int_list(text):
    """``"0,±1,+-2"`` -> [0, 1, -1, 2, -2]."""
    out = []
    for tok in str(text).replace(" ", "").split(","):
        if not tok:
            continue
        if tok[0] == "±" or tok[:2] == "+-":
            v = int(tok.lstrip("±+-"))
            out += [v, -v] if v else [0]
        else:
            out.append(int(tok))
    return out


def parse_float_list(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def parse_q_range(text):
    """``"-4..4"`` -> [-4, ..., 4]."""
    lo, sep, hi = str(text).partition("..")
    if not sep:
        raise UsageError(f"range must look like a..b, got {text!r}")
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise UsageError("empty charge range")
    return list(range(lo, hi + 1))


def _nmax(text):
    if text is None or str(text).lower() == "auto":
        return None
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("nmax must be a positive integer or 'auto'")
    return n


def _xi_from(args, prefix=""):
    get = lambda k: getattr(args, prefix + k, None)   # noqa: E731
    given = [k for k in ("xi", "xi_mod", "xi_re") if get(k) is not None]
    if get("xi_arg") is not None and get("xi_mod") is None:
        raise UsageError("--xi-arg needs --xi-mod")
    if get("xi_im") is not None and get("xi_re") is None:
        raise UsageError("--xi-im needs --xi-re")
    if len(given) > 1:
        raise UsageError("give xi in one encoding only (--xi, --xi-mod/--xi-arg or --xi-re/--xi-im)")
    if get("xi") is not None:
        try:
            return complex(get("xi").replace(" ", "").replace("i", "j"))
        except ValueError:
            raise UsageError(f"cannot parse xi {get('xi')!r}") from None
    if get("xi_mod") is not None:
        return cmath.rect(get("xi_mod"), get("xi_arg") or 0.0)
    if get("xi_re") is not None:
        return complex(get("xi_re"), get("xi_im") or 0.0)
    return 0j


def _add_state_args(p, suffix=""):
    dest = suffix.replace("-", "_")
    p.add_argument(f"--xi{suffix}", dest=f"{dest}xi", help="complex xi, e.g. 0.3+0.4j")
    p.add_argument(f"--xi-mod{suffix}", dest=f"{dest}xi_mod", type=float)
    p.add_argument(f"--xi-arg{suffix}", dest=f"{dest}xi_arg", type=float)
    p.add_argument(f"--xi-re{suffix}", dest=f"{dest}xi_re", type=float)
    p.add_argument(f"--xi-im{suffix}", dest=f"{dest}xi_im", type=float)
    p.add_argument(f"--charge{suffix}", dest=f"{dest}charge", type=int, default=0)
    p.add_argument(f"--parity{suffix}", dest=f"{dest}parity", default="even",
                   choices=("even", "odd", "full"))


def _add_common(p, tol):
    p.add_argument("--deform", default="identity",
                   help="identity | qdef:<q> | power:<p> | table:<path>")
    p.add_argument("--dual", action="store_true", help="use the 1/f deformation")
    p.add_argument("--nmax", type=_nmax, default=None, help="auto or a positive integer")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="nlcharge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="build and serialise a state")
    _add_state_args(p)
    _add_common(p, 1e-10)

    p = sub.add_parser("overlap", help="closed-form versus direct overlap")
    _add_state_args(p)
    _add_state_args(p, "-b")
    _add_common(p, 1e-12)

    p = sub.add_parser("squeeze", help="squeezing report")
    p.add_argument("--family", choices=("suf11", "single", "two"), default="suf11")
    _add_state_args(p)
    _add_common(p, nonclass.AGREE_TOL)

    p = sub.add_parser("antibunch", help="two-mode correlation g2(0)")
    _add_state_args(p)
    _add_common(p, nonclass.AGREE_TOL)

    p = sub.add_parser("cothscan", help="coth-bar curves, one CSV per |q| panel")
    p.add_argument("pairs", nargs="*", help="optional q=<list> p=<list> tokens")
    p.add_argument("--q", dest="qlist", default=None, help="charges, e.g. 0,±1,±2")
    p.add_argument("--p", dest="plist", default=None, help="exponents, e.g. 2,3,4")
    p.add_argument("--x-min", type=float, default=1e-3)
    p.add_argument("--x-max", type=float, default=200.0)
    p.add_argument("--points", type=int, default=400)
    _add_common(p, 1e-12)

    p = sub.add_parser("completeness", help="resolution-of-unity report")
    p.add_argument("--q-range", default="-4..4")
    p.add_argument("--deforms", default="identity,power:2,qdef:2")
    p.add_argument("--n-check", type=int, default=6)
    p.add_argument("--n-box", type=int, default=6)
    p.add_argument("--q-max", type=int, default=12)
    _add_common(p, resolve.TOL)

    p = sub.add_parser("dalgebra", help="differential-operator realisation report")
    p.add_argument("--charges", default="0,1,3,-2")
    p.add_argument("--deforms", default="identity,power:2")
    p.add_argument("--degree", type=int, default=24)
    _add_common(p, dalg.TOL)

    p = sub.add_parser("generate", help="projection-route fidelity")
    p.add_argument("--xi1", required=True)
    p.add_argument("--xi2", required=True)
    p.add_argument("--charge", type=int, default=0)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--nodes", type=int, default=None, help="angular nodes (default: minimum)")
    _add_common(p, 1e-10)

    p = sub.add_parser("schmidt", help="Schmidt coefficients and entropy")
    _add_state_args(p)
    _add_common(p, 1e-12)
    return parser


# --- output ------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _emit(report, args):
    text = json.dumps(_clean(report), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _deform(args):
    try:
        return DeformationSpec.parse(args.deform)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None


def _request(args, prefix=""):
    g = lambda k: getattr(args, prefix + k)   # noqa: E731
    return states.StateRequest(_xi_from(args, prefix), g("charge"), g("parity"),
                               _deform(args), dual=args.dual, nmax=args.nmax)


def _finish(report, checks, args):
    """Attach named checks, emit, and return the exit status."""
    report["checks"] = [{"name": n, "value": v, "passed": bool(ok)} for n, v, ok in checks]
    report["passed"] = all(ok for _, _, ok in checks)
    _emit(report, args)
    for n, v, ok in checks:
        if not ok:
            print(f"tolerance check failed: {n} = {v!r}", file=sys.stderr)
    return 0 if report["passed"] else 1


# --- subcommands ------------------------------------------------------

def _cmd_state(args):
    req = _request(args)
    state, norms = states.build_state(req)
    rec = states.state_record(state, req, norms)
    deform = req.effective_deform
    power = 1 if req.parity == "full" else 2
    eig = states.check_eigenpair(state.padded(state.nmax + 4), req.xi, deform, power)
    n1 = expect(sector_op("N1", deform), state).real
    n2 = expect(sector_op("N2", deform), state).real
    mean = abs(n1 - n2 - req.charge)
    checks = [("eigen_residual", eig, eig < args.tol),
              ("norm_defect", abs(state.norm() - 1.0), abs(state.norm() - 1.0) < 1e-12),
              ("mean_value_relation", mean, mean < 1e-12)]
    return _finish({"command": "state", "state": rec}, checks, args)


def _cmd_overlap(args):
    a = _request(args)
    b = _request(args, "_b")
    closed = states.overlap(a, b)
    direct = states.direct_overlap(a, b)
    diff = abs(closed - direct)
    rep = {"command": "overlap", "closed_form": [closed.real, closed.imag],
           "direct": [direct.real, direct.imag], "difference": diff}
    return _finish(rep, [("overlap_difference", diff, diff < args.tol)], args)


def _cmd_squeeze(args):
    req = _request(args)
    fn = {"suf11": nonclass.su_f11_report, "single": nonclass.single_mode_report,
          "two": nonclass.two_mode_report}[args.family]
    try:
        rep = fn(req, tol=args.tol).to_dict()
        ok = True
    except nonclass.ClosedFormMismatch as exc:
        rep, ok = {"error": str(exc)}, False
    return _finish({"command": "squeeze", "report": rep},
                   [("closed_form_agreement", ok, ok)], args)


def _cmd_antibunch(args):
    req = _request(args)
    try:
        rep = nonclass.antibunch_report(req, tol=args.tol).to_dict()
        ok = True
    except nonclass.ClosedFormMismatch as exc:
        rep, ok = {"error": str(exc)}, False
    return _finish({"command": "antibunch", "report": rep},
                   [("closed_form_agreement", ok, ok)], args)


def _cothscan_lists(args):
    qs, ps = args.qlist, args.plist
    for tok in args.pairs:
        key, sep, val = tok.partition("=")
        if not sep or key not in ("q", "p"):
            raise UsageError(f"unrecognised token {tok!r}; expected q=<list> or p=<list>")
        if key == "q":
            qs = val
        else:
            ps = val
    return parse_int_list(qs or "0,±1,±2"), parse_float_list(ps or "2,3,4")


def _cmd_cothscan(args):
    qs, ps = _cothscan_lists(args)
    if args.points < 2 or not 0 < args.x_min < args.x_max:
        raise UsageError("need 0 < x-min < x-max and at least two points")
    if any(p < 1 for p in ps):
        raise UsageError("power-law exponents must be >= 1")
    xs = nonclass.default_x_grid(args.points, args.x_min, args.x_max)
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    curves = {}
    for q in qs:
        for p in ps:
            curves[(q, p)] = nonclass.coth_scan(q, p, xs)[1]
    panels = sorted({abs(q) for q in qs})
    files, windows, checks = [], [], []
    for aq in panels:
        path = outdir / f"cothscan_q{aq}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q", "p", "x", "coth", "subUnity"])
            for q in [v for v in qs if abs(v) == aq]:
                for p in ps:
                    for x, c in zip(xs, curves[(q, p)]):
                        w.writerow([q, repr(float(p)), repr(float(x)), repr(float(c)),
                                    "true" if c < 1 else "false"])
        files.append(str(path))
    for (q, p), vals in curves.items():
        win = nonclass.sub_unity_windows(xs, vals)
        windows.append({"q": q, "p": p, "windows": win})
        checks.append((f"sub_unity_window[q={q},p={p:g}]", len(win), bool(win)))
        mirror = (-q, p)
        if q > 0 and mirror in curves:
            d = float(np.max(np.abs(vals - curves[mirror]) / vals))
            checks.append((f"charge_sign_symmetry[|q|={q},p={p:g}]", d, d < args.tol))
    rep = {"command": "cothscan", "files": files, "grid": {"x_min": args.x_min,
           "x_max": args.x_max, "points": args.points}, "windows": windows}
    _emit_cothscan_summary(rep, checks, args)
    return 0 if all(ok for _, _, ok in checks) else 1


def _emit_cothscan_summary(rep, checks, args):
    rep["checks"] = [{"name": n, "value": v, "passed": bool(ok)} for n, v, ok in checks]
    rep["passed"] = all(ok for _, _, ok in checks)
    text = json.dumps(_clean(rep), indent=2) + "\n"
    if args.format == "json":
        sys.stdout.write(text)
    for n, v, ok in checks:
        if not ok:
            print(f"tolerance check failed: {n} = {v!r}", file=sys.stderr)


def _cmd_completeness(args):
    qs = parse_q_range(args.q_range)
    try:
        deforms = [DeformationSpec.parse(t) for t in args.deforms.split(",")]
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    rep = resolve.completeness_report(qs, deforms, args.n_check, args.n_box, args.q_max, args.tol)
    rep["command"] = "completeness"
    checks = [(f"sector[q={r['charge']},{r['deform']},conj={r['conjugate']}]",
               max(r["residual"], r["projector"]), max(r["residual"], r["projector"]) < args.tol)
              for r in rep["sectors"]]
    checks += [(f"moment[q={m['charge']},m={m['m']}]", m["rel_err"], m["passed"])
               for m in rep["moments"]]
    checks.append(("box", rep["box"]["residual"], rep["box"]["residual"] < args.tol))
    return _finish(rep, checks, args)


def _cmd_dalgebra(args):
    qs = parse_int_list(args.charges)
    try:
        deforms = [DeformationSpec.parse(t) for t in args.deforms.split(",")]
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if args.degree < max(abs(q) for q in qs) + 6:
        raise UsageError("degree must be at least |q| + 6 for every charge")
    rep = dalg.verification_report(qs, deforms, args.degree, args.tol, seed=args.seed)
    rep["command"] = "dalgebra"
    checks = [(f"{r['row']}[{r['column']},q={r['charge']},{r['deform']}]", r["residual"],
               r["residual"] < args.tol) for r in rep["table"] if r["applicable"]]
    for g in rep["generators"]:
        for kind in ("ket", "bra", "algebra"):
            for name, v in g[kind].items():
                checks.append((f"{kind}:{name}[q={g['charge']},{g['deform']}]", v, v < args.tol))
    return _finish(rep, checks, args)


def _cmd_generate(args):
    try:
        xi1 = complex(args.xi1.replace("i", "j"))
        xi2 = complex(args.xi2.replace("i", "j"))
    except ValueError:
        raise UsageError("cannot parse --xi1/--xi2") from None
    deform = _deform(args)
    fid, norm = states.projection_fidelity(xi1, xi2, args.charge, args.parity, deform,
                                           args.nodes)
    rep = {"command": "generate", "xi1": [xi1.real, xi1.imag], "xi2": [xi2.real, xi2.imag],
           "charge": args.charge, "parity": args.parity, "fidelity": fid, "norm": norm}
    checks = [("fidelity", fid, fid > 1 - args.tol),
              ("norm", norm, abs(norm - 1) < 1e-8)]
    return _finish(rep, checks, args)


def _cmd_schmidt(args):
    req = _request(args)
    state, _ = states.build_state(req)
    prof = states.schmidt_profile(state)
    rep = {"command": "schmidt", "coefficients": prof.coefficients, "entropy": prof.entropy,
           "schmidt_number": prof.schmidt_number, "nonzero": int(np.sum(prof.coefficients > 0))}
    total = float(np.sum(prof.coefficients ** 2))
    return _finish(rep, [("coefficient_norm", total, abs(total - 1) < args.tol)], args)


_COMMANDS = {
    "state": _cmd_state, "overlap": _cmd_overlap, "squeeze": _cmd_squeeze,
    "antibunch": _cmd_antibunch, "cothscan": _cmd_cothscan,
    "completeness": _cmd_completeness, "dalgebra": _cmd_dalgebra,
    "generate": _cmd_generate, "schmidt": _cmd_schmidt,
}


def _join_negative_values(argv):
    # "--q-range -4..4" would otherwise read the range as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--q-range", "--charges", "--q"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError, states.TruncationError) as exc:
        msg = str(exc).replace("xi=0", "ξ=0")
        print(f"nlcharge {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
