"""Nonnegative univariate interpolation of level sequences.

Polynomials are numpy polynomial series (``Polynomial`` for the power
basis, ``Chebyshev`` where conditioning matters).  Every routine here only
uses the common series API, so either kind may be passed in.

For the N-gon the levels are cosines of odd multiples of pi/N and the
vanishing polynomial is a Chebyshev polynomial (or a sum of two); in the
power basis its coefficients grow like 2.4**deg and interpolation residuals
reach 1e-7 by N = 64, so the N-gon path works in the Chebyshev basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial._polybase import ABCPolyBase

TRIM_TOL = 1e-14
NONNEG_TOL = 1e-9


class InterpolationError(RuntimeError):
    """Raised when a construction that theory guarantees fails numerically."""


@dataclass(frozen=True)
class LevelSequence:
    values: tuple[float, ...]
    increasing: bool = True

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "values", v)
        diffs = np.diff(v)
        if self.increasing:
            if len(v) and v[0] != 0:
                raise ValueError("increasing level sequences must start at 0")
            if np.any(diffs <= 0):
                raise ValueError("levels must be strictly increasing")
        elif np.any(diffs >= 0):
            raise ValueError("levels must be strictly decreasing")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class NonnegDecision:
    nonnegative: bool
    witness: float | None = None
    value: float | None = None

    def __bool__(self):
        return self.nonnegative


def trim(p: ABCPolyBase, tol: float = TRIM_TOL) -> ABCPolyBase:
    """Drop trailing coefficients below ``tol`` relative to the largest one."""
    c = np.asarray(p.coef, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return type(p)([0.0], domain=p.domain, window=p.window)
    keep = len(c)
    while keep > 1 and abs(c[keep - 1]) <= tol * scale:
        keep -= 1
    return type(p)(c[:keep], domain=p.domain, window=p.window)


def leading(p: ABCPolyBase) -> float:
    """Leading power-basis coefficient of a trimmed series."""
    p = trim(p)
    lead = p.coef[-1]
    if isinstance(p, Chebyshev) and p.degree() > 0:
        lead *= 2.0 ** (p.degree() - 1)
    return float(lead)


def _magnitude(p: ABCPolyBase, x: np.ndarray) -> np.ndarray:
    # sum_i |c_i| |phi_i(x)|, the scale against which rounding is judged
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.zeros_like(x)
    for i, c in enumerate(p.coef):
        if c != 0:
            total += abs(c) * np.abs(type(p).basis(i)(x))
    return total


def _cauchy_radius(p: ABCPolyBase) -> float:
    pc = trim(p.convert(kind=Polynomial))
    c = pc.coef
    if len(c) < 2:
        return 1.0
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))


def nonnegative_on(p: ABCPolyBase, lower: float = -math.inf, upper: float = math.inf,
                   tol: float = NONNEG_TOL) -> NonnegDecision:
    """Decide ``p >= 0`` on ``[lower, upper]`` with a witness on failure.

    The minimum over an interval is attained at an endpoint or at a real
    critical point.  Critical points come from the companion (colleague)
    eigenvalues of p'; evaluating at the real part of every eigenvalue
    can only add true information, so clustered or slightly complex
    double roots of p' cannot hide a negative dip.
    """
    p = trim(p)
    deg = p.degree()
    if deg == 0:
        v = float(p.coef[0])
        ok = v >= 0
        return NonnegDecision(ok, None if ok else (0.0 if math.isinf(lower) else lower), v)

    lead = leading(p)
    far = _cauchy_radius(p) + 1.0
    # behaviour at infinite ends is forced by degree and sign
    if math.isinf(upper) and lead < 0:
        x = far
        return NonnegDecision(False, x, float(p(x)))
    if math.isinf(lower) and (lead < 0) != (deg % 2 == 1):
        x = -far
        return NonnegDecision(False, x, float(p(x)))

    crit = np.real(p.deriv().roots()) if deg > 1 else np.array([])
    cand = [x for x in crit if lower <= x <= upper]
    cand += [b for b in (lower, upper) if not math.isinf(b)]
    if not cand:
        return NonnegDecision(True)
    cand = np.array(cand, dtype=float)
    vals = p(cand)
    margin = vals + tol * np.maximum(1.0, _magnitude(p, cand))
    j = int(np.argmin(margin))
    if margin[j] < 0:
        return NonnegDecision(False, float(cand[j]), float(vals[j]))
    return NonnegDecision(True)


def is_globally_nonnegative(p: ABCPolyBase, tol: float = NONNEG_TOL) -> NonnegDecision:
    """Equivalent to: even degree, positive lead, real roots of even multiplicity."""
    return nonnegative_on(p, tol=tol)


def vanishing_poly(a: Sequence[float] | LevelSequence, kind=Polynomial) -> ABCPolyBase:
    """Monic polynomial prod (x - a_i)."""
    return kind.fromroots(np.asarray(list(a), dtype=float))


def deflate_double_root(r: ABCPolyBase, u: float) -> ABCPolyBase:
    """Quotient of ``r`` by (x - u)^2, discarding the (tiny) remainder."""
    kind = type(r)
    quo, _rem = divmod(r, kind.fromroots([u, u]))
    return quo


def tangent_gap(q: ABCPolyBase, u: float) -> ABCPolyBase:
    """q(x) - q(u) - q'(u)(x - u)."""
    x = type(q).identity()
    return q - float(q(u)) - float(q.deriv()(u)) * (x - u)


def tangent_condition(q: ABCPolyBase, u: float, lower: float = -math.inf,
                      tol: float = NONNEG_TOL) -> bool:
    """True iff the graph of q lies above its tangent at u (on [lower, inf))."""
    q = trim(q)
    if q.degree() <= 1:
        return True
    s = deflate_double_root(tangent_gap(q, u), u)
    return bool(nonnegative_on(s, lower=lower, tol=tol))


def interpolant(a: LevelSequence, q: ABCPolyBase | None = None) -> ABCPolyBase:
    """The only candidate p = alpha q + l with p(a_i) = l(a_i) and p'(a_0) = 0.

    ``l`` is x - a_0 for increasing sequences and a_0 - x for decreasing
    ones; ``q`` defaults to the vanishing polynomial of ``a`` and may be
    replaced by a multiple of it carrying extra (dummy) roots.
    """
    if q is None:
        q = vanishing_poly(a)
    kind = type(q)
    a0 = a[0]
    slope = 1.0 if a.increasing else -1.0
    dq = float(q.deriv()(a0))
    if dq == 0.0:
        raise ValueError("q'(a_0) = 0: repeated root at a_0")
    l = kind.identity() * slope - slope * a0
    return trim(q * (-slope / dq) + l)


def candidate_interpolant(a: LevelSequence | Sequence[float]) -> ABCPolyBase:
    """p(x) = -q(x)/q'(0) + x for an increasing sequence starting at 0."""
    if not isinstance(a, LevelSequence):
        a = LevelSequence(tuple(a), increasing=True)
    if not a.increasing:
        raise ValueError("candidate_interpolant expects an increasing sequence")
    return interpolant(a)


def is_subadditive(a: LevelSequence | Sequence[float]) -> bool:
    v = list(a)
    k = len(v)
    return all(v[i + j] <= v[i] + v[j] for i in range(k) for j in range(k - i))


def disccone_check(a1: float, a2: float, a3: float) -> bool:
    if not 0 < a1 < a2 < a3:
        raise ValueError("expected 0 < a1 < a2 < a3")
    return (a1 + a2 + a3) ** 2 <= 4 * (a1 * a2 + a1 * a3 + a2 * a3)


def chebyshev(m: int) -> Polynomial:
    """T_m in the power basis, from T_{m+1} = 2x T_m - T_{m-1}."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    x = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([1.0]), x
    if m == 0:
        return prev
    for _ in range(m - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def ngon_levels(n: int) -> LevelSequence:
    """Distinct x-coordinates cos((2i+1)pi/N) of the N-gon, decreasing."""
    if n < 3:
        raise ValueError("N must be >= 3")
    k = math.ceil(n / 2)
    return LevelSequence(tuple(math.cos((2 * i + 1) * math.pi / n) for i in range(k)),
                         increasing=False)


def ngon_vanishing_poly(n: int, dummy: bool | None = None) -> Chebyshev:
    """q_N in the Chebyshev basis, optionally times x (the dummy root at 0).

    ``dummy=None`` adds the extra root exactly when the level count is odd.
    """
    a = ngon_levels(n)
    q = Chebyshev.fromroots(a.values)
    if dummy is None:
        dummy = len(a) % 2 == 1
    if dummy:
        q = q * Chebyshev([0.0, 1.0])
    return q


def theta_rank_interpolant(n: int) -> Chebyshev:
    """Nonnegative p of degree 2*ceil(N/4) with p(a_i) = a_0 - a_i on the levels.

    N = 0, 3 mod 4 have an even number of levels and use q_N directly;
    N = 1, 2 mod 4 multiply q_N by x first.  For N = 2 mod 4 the level set
    already contains 0, so the dummy root doubles an existing one, which
    does not affect the interpolation conditions.
    """
    a = ngon_levels(n)
    q = ngon_vanishing_poly(n)
    if not tangent_condition(q, a[0]):
        raise InterpolationError(f"tangent condition fails for N={n}")
    p = interpolant(a, q)
    expected = 2 * math.ceil(n / 4)
    if p.degree() != expected:
        raise InterpolationError(f"interpolant degree {p.degree()} != {expected} for N={n}")
    verdict = is_globally_nonnegative(p)
    if not verdict:
        raise InterpolationError(f"interpolant negative at x={verdict.witness} for N={n}")
    return p


def lemma_qN_cheb_check(n: int, rtol: float = 1e-8) -> bool:
    """Is q_N proportional to T_{N/2} (N even) or T_{floor}+T_{ceil} (N odd)?"""
    q = ngon_vanishing_poly(n, dummy=False).coef
    target = np.zeros(math.ceil(n / 2) + 1)
    if n % 2 == 0:
        target[n // 2] = 1.0
    else:
        target[n // 2] = target[n // 2 + 1] = 0.5
    m = len(target)
    q = np.pad(q, (0, max(0, m - len(q))))
    target = np.pad(target, (0, max(0, len(q) - m)))
    lam = q[m - 1] / target[m - 1]
    return bool(np.max(np.abs(q - lam * target)) <= rtol * np.max(np.abs(q)))


def cheb_tangent_lemma_check(n: int, u: float, global_domain: bool | None = None) -> bool:
    """T_N lies above its tangent at u >= cos(pi/N).

    By default the domain is all of R for even N and [-1, inf) for odd N;
    pass ``global_domain`` to force one or the other.
    """
    if u < math.cos(math.pi / n) - 1e-15:
        raise ValueError(f"u must be >= cos(pi/{n})")
    if global_domain is None:
        global_domain = n % 2 == 0
    lower = -math.inf if global_domain else -1.0
    return tangent_condition(Chebyshev.basis(n), u, lower=lower)


def figure_curve(q: ABCPolyBase, u: float, xs: np.ndarray) -> np.ndarray:
    """Rows (x, q(x), tangent at u evaluated at x)."""
    tangent = float(q(u)) + float(q.deriv()(u)) * (xs - u)
    return np.column_stack([xs, q(xs), tangent])
