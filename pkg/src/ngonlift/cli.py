"""Command-line interface: ``ngonlift <subcommand> ...``.

Exit status is 0 on success, 1 when a verification or invariant check
fails, and 2 on bad arguments.  JSON goes to --out (or stdout); human
readable reports go to stderr when the JSON is on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from numpy.polynomial import Chebyshev

from . import interp, lift, lowerbound, soscert

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_TOL = {"powers-of-two": 1e-10, "hexagon": 1e-12, "hierarchy": 1e-8, "custom": 1e-10}


class UsageError(Exception):
    pass


def _tolerance(default: float) -> float:
    raw = os.environ.get("NGONLIFT_TOL")
    if raw is None:
        return default
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"NGONLIFT_TOL is not a number: {raw!r}") from None
    if not tol > 0:
        raise UsageError("NGONLIFT_TOL must be positive")
    return tol


def _int_range(text: str) -> list[int]:
    """'4' -> [4]; '2..12' -> [2, ..., 12]."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a range a..b, got {text!r}") from None


def _freqs(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


class _Output:
    def __init__(self, path: str | None):
        self.path = path

    def emit(self, text: str) -> None:
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)

    def report(self, text: str) -> None:
        print(text, file=sys.stdout if self.path else sys.stderr)


# -- subcommands ------------------------------------------------------------------

def _certify_one(scheme: str, size: int, tol: float):
    cert = soscert.certificate_for(scheme, size)
    return cert, soscert.verify_certificate(cert, tol)


def cmd_certify(args) -> int:
    scheme = args.scheme
    if scheme == "powers-of-two":
        if args.n is None:
            raise UsageError("the powers-of-two scheme needs --n (the polygon has 2^n vertices)")
        sizes = args.n
        if min(sizes) < 2:
            raise UsageError("--n must be >= 2")
    else:
        if args.N is None:
            raise UsageError(f"the {scheme} scheme needs --N")
        sizes = args.N
        if min(sizes) < 3:
            raise UsageError("--N must be >= 3")
        if scheme == "hexagon" and sizes != [6]:
            raise UsageError("the hexagon scheme needs --N 6")
    tol = _tolerance(DEFAULT_TOL[scheme])
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda s: _certify_one(scheme, s, tol), sizes))
    out = _Output(args.out)
    payload = [cert.to_json() for cert, _ in results]
    out.emit(json.dumps(payload[0] if len(payload) == 1 else payload, indent=1) + "\n")
    ok = True
    for cert, rep in results:
        out.report(f"N={cert.n} scheme={scheme} squares={len(cert.squares)} {rep.summary()}")
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lift(args) -> int:
    if args.scheme == "hierarchy":
        if args.N is None or len(args.N) != 1:
            raise UsageError("the hierarchy lift needs a single --N")
        size = args.N[0]
        if size < 3:
            raise UsageError("--N must be >= 3")
    else:
        if args.n is None or len(args.n) != 1:
            raise UsageError(f"the {args.scheme} lift needs a single --n")
        size = args.n[0]
        if size < 2:
            raise UsageError("--n must be >= 2")
    L = lift.build_lift(args.scheme, size)
    rep = lift.verify_lift(L, slack=_tolerance(lift.PSD_SLACK), tol=_tolerance(lift.GRAM_TOL))
    out = _Output(args.out)
    if args.format == "sdpa":
        out.emit(lift.export_sdpa_text(L))
    else:
        out.emit(json.dumps(L.to_json(), indent=1) + "\n")
    out.report(f"{args.scheme} lift of the {L.n}-gon, block sizes {L.block_sizes()}")
    out.report(rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_cluster(args) -> int:
    if args.N is None or len(args.N) != 1:
        raise UsageError("cluster needs a single --N")
    n = args.N[0]
    if n < 3:
        raise UsageError("--N must be >= 3")
    if not args.freqs:
        raise UsageError("cluster needs --freqs")
    bad = [k for k in args.freqs if not 0 <= k < n]
    if bad:
        raise UsageError(f"frequencies outside 0..{n - 1}: {bad}")
    rng = np.random.default_rng(args.seed)
    try:
        rep = lowerbound.refute_sos_valid(args.freqs, n, rng=rng)
    except lowerbound.InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = _Output(args.out)
    if rep is None:
        out.emit(json.dumps({"n": n, "K": sorted(set(args.freqs)), "refuted": False}) + "\n")
        out.report("no valid clustering found")
        return EXIT_OK
    out.emit(rep.dumps() + "\n")
    out.report(f"refuted: {len(rep.clustering.clusters)} clusters, gamma={rep.gamma}, "
               f"L(l)={rep.L_ell.real:.6g}, min L(|h|^2)={rep.min_L_h2:.3e}")
    return EXIT_OK if rep.sound else EXIT_FAIL


def cmd_theta_rank(args) -> int:
    if args.N is None:
        raise UsageError("theta-rank needs --N")
    rows = []
    ok = True
    for n in args.N:
        if n < 3:
            raise UsageError("--N must be >= 3")
        try:
            p = interp.theta_rank_interpolant(n)
        except interp.InterpolationError as exc:
            rows.append({"N": n, "error": str(exc)})
            ok = False
            continue
        cert = soscert.hierarchy_certificate(n)
        rep = soscert.verify_certificate(cert, _tolerance(DEFAULT_TOL["hierarchy"]))
        ok &= rep.passed
        rows.append({
            "N": n,
            "degree": p.degree(),
            "expected_degree": 2 * math.ceil(n / 4),
            "chebyshev_coefficients": [float(c) for c in p.coef],
            "nonnegative": bool(interp.is_globally_nonnegative(p)),
            "certificate": rep.to_json(),
        })
    out = _Output(args.out)
    out.emit(json.dumps(rows[0] if len(rows) == 1 else rows, indent=1) + "\n")
    for r in rows:
        if "error" in r:
            out.report(f"N={r['N']}: {r['error']}")
        else:
            out.report(f"N={r['N']}: degree {r['degree']} (2*ceil(N/4) = {r['expected_degree']}), "
                       f"certificate {'pass' if r['certificate']['passed'] else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def _figure_data(args) -> tuple[np.ndarray, str]:
    which = args.which
    if which == "arithmetic":
        k = args.k if args.k is not None else 6
        if k < 2:
            raise UsageError("--k must be >= 2")
        q, u = interp.vanishing_poly(range(k)), 0.0
        lo, hi = -0.5, k - 0.5
    elif which == "chebyshev":
        n = args.N[0] if args.N else 8
        if n < 3:
            raise UsageError("--N must be >= 3")
        q, u = interp.ngon_vanishing_poly(n), math.cos(math.pi / n)
        lo, hi = -1.1, 1.1
    else:
        n = args.N[0] if args.N else 4
        if n < 3:
            raise UsageError("--N must be >= 3")
        q, u = Chebyshev.basis(n), math.cos(math.pi / n)
        lo, hi = -1.2, 1.2
    lo = args.xmin if args.xmin is not None else lo
    hi = args.xmax if args.xmax is not None else hi
    if not hi > lo:
        raise UsageError("--xmax must exceed --xmin")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    xs = np.linspace(lo, hi, args.points)
    return interp.figure_curve(q, u, xs), f"tangent at u={u:.17g}"


def cmd_figures(args) -> int:
    data, note = _figure_data(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "q", "tangent"])
    for x, q, t in data:
        w.writerow([repr(float(x)), repr(float(q)), repr(float(t))])
    out = _Output(args.out)
    out.emit(buf.getvalue())
    out.report(f"{args.which}: {len(data)} samples, {note}")
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if text.startswith("*"):
        L = lift.parse_sdpa_text(text)
        rep = lift.verify_lift(L, slack=_tolerance(lift.PSD_SLACK), tol=_tolerance(lift.GRAM_TOL))
        print(rep.summary())
        return EXIT_OK if rep.passed else EXIT_FAIL
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is neither JSON nor an SDPA file: {exc}") from None
    items = data if isinstance(data, list) else [data]
    ok = True
    for item in items:
        if "squares" in item:
            cert = soscert.SosCertificate.from_json(item)
            rep = soscert.verify_certificate(cert, _tolerance(DEFAULT_TOL.get(cert.scheme, 1e-10)))
            print(f"N={cert.n} {rep.summary()}")
        elif "blocks" in item:
            rep = lift.verify_lift(lift.LiftDescription.from_json(item),
                                   slack=_tolerance(lift.PSD_SLACK), tol=_tolerance(lift.GRAM_TOL))
            print(rep.summary())
        else:
            raise UsageError(f"{path}: unrecognised JSON document")
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngonlift", allow_abbrev=False,
                                     description="Sum-of-squares certificates and psd lifts of regular polygons.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schemes=None, default=None):
        p.add_argument("--n", type=_int_range, help="exponent n of the 2^n-gon (or a range a..b)")
        p.add_argument("--N", type=_int_range, help="number of vertices (or a range a..b)")
        if schemes:
            p.add_argument("--scheme", choices=schemes, default=default)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("certify", allow_abbrev=False, help="build and verify a facet certificate")
    common(p, ["powers-of-two", "hierarchy", "hexagon"], "powers-of-two")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("lift", allow_abbrev=False, help="build, verify and export a psd lift")
    common(p, list(lift.SCHEMES), "chained")
    p.add_argument("--format", choices=["sdpa", "json"], default="json")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("cluster", allow_abbrev=False, help="try to refute sos-validity of a frequency set")
    common(p)
    p.add_argument("--freqs", type=_freqs, help="comma separated frequencies, e.g. 0,1,3,7")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("theta-rank", allow_abbrev=False, help="nonnegative interpolant for the N-gon")
    common(p)
    p.set_defaults(func=cmd_theta_rank)

    p = sub.add_parser("figures", allow_abbrev=False, help="emit curve samples as CSV")
    common(p)
    p.add_argument("--which", choices=["arithmetic", "chebyshev", "tangent-lemma"], required=True)
    p.add_argument("--k", type=int, help="number of levels for --which arithmetic")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("verify", allow_abbrev=False, help="re-verify a certificate or lift file")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ngonlift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
