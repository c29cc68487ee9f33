"""Sum-of-squares certificates for the facet functional of the regular N-gon.

The facet functional is l = cos(pi/N) - c_1, which vanishes at vertices 1
and N and is positive at every other vertex.  A certificate is a list of
functions h_i on the vertex set with sum |h_i|^2 = l there.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial._polybase import ABCPolyBase

from . import interp
from .momentmap import basis_labels, gram_map_matrix
from .trigspace import (
    ALGEBRA_TOL,
    RealLabel,
    TrigPoly,
    from_real_basis,
    to_real_basis,
)

PAIR_TOL = 1e-7
GRAM_PSD_TOL = 1e-12
SCHEMES = ("powers-of-two", "hexagon", "hierarchy", "custom")


def facet_functional(n: int, r: int = 0) -> TrigPoly:
    """cos(pi/N) e_0 - (e^{i pi/N} e_1 + e^{-i pi/N} e_{-1}) / 2, rotated by r."""
    ell = TrigPoly.constant(math.cos(math.pi / n), n) - TrigPoly.cos(1, n)
    return ell.rotate(r) if r % n else ell


def real_support(freqs: Iterable[int], n: int) -> frozenset[int]:
    return frozenset(min(k % n, (-k) % n) for k in freqs)


@dataclass(frozen=True)
class SosCertificate:
    n: int
    target: TrigPoly
    squares: tuple[TrigPoly, ...]
    scheme: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "squares", tuple(self.squares))
        for h in self.squares:
            if h.n != self.n:
                raise ValueError("square modulus differs from certificate modulus")
        if self.target.n != self.n:
            raise ValueError("target modulus differs from certificate modulus")

    @property
    def hermitian_support(self) -> frozenset[int]:
        """Union of the e_k supports of the squares, as a subset of Z_N."""
        out: set[int] = set()
        for h in self.squares:
            out |= h.support()
        return frozenset(out)

    @property
    def support(self) -> frozenset[int]:
        """Real frequencies 0..N/2 carried by the squares."""
        return real_support(self.hermitian_support, self.n)

    def sum_of_squares(self) -> TrigPoly:
        total = TrigPoly(self.n)
        for h in self.squares:
            total = total + h.abs2()
        return total

    def rotate(self, r: int) -> SosCertificate:
        return SosCertificate(self.n, self.target.rotate(r),
                              tuple(h.rotate(r) for h in self.squares), self.scheme)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "target": self.target.to_json(),
            "squares": [h.to_json() for h in self.squares],
            "scheme": self.scheme,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> SosCertificate:
        return cls(int(data["n"]), TrigPoly.from_json(data["target"]),
                   tuple(TrigPoly.from_json(h) for h in data["squares"]),
                   data.get("scheme", "custom"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


# -- constructions ----------------------------------------------------------

def powers_of_two_coefficient(k: int, n: int) -> float:
    N = 2 ** n
    return math.sin(math.pi / N) / (2 ** k * math.sin(2 ** (k + 1) * math.pi / N))


def powers_of_two_certificate(n: int) -> SosCertificate:
    """n - 1 squares supported on {0, 1, 2, 4, ..., 2^(n-2)} for the 2^n-gon."""
    if n < 2:
        raise ValueError("n must be >= 2")
    N = 2 ** n
    squares = []
    for k in range(n - 1):
        f = 2 ** k
        h = TrigPoly.constant(math.cos(f * math.pi / N), N) - TrigPoly.cos(f, N)
        squares.append(h * math.sqrt(powers_of_two_coefficient(k, n)))
    return SosCertificate(N, facet_functional(N), tuple(squares), "powers-of-two")


def powers_of_two_identity_residual(n: int, theta) -> np.ndarray:
    """|l(theta) - sum of squares(theta) - remainder(theta)| off the vertex set.

    The recursion leaves the remainder sin(pi/N) (-cos(2^(n-1) theta)) / 2^(n-1),
    which vanishes on the vertices of the 2^n-gon.
    """
    N = 2 ** n
    theta = np.asarray(theta, dtype=float)
    lhs = math.cos(math.pi / N) - np.cos(theta)
    rhs = np.zeros_like(theta)
    for k in range(n - 1):
        f = 2 ** k
        rhs += powers_of_two_coefficient(k, n) * (math.cos(f * math.pi / N) - np.cos(f * theta)) ** 2
    rhs -= math.sin(math.pi / N) * np.cos(2 ** (n - 1) * theta) / 2 ** (n - 1)
    return np.abs(lhs - rhs)


def hexagon_certificate() -> SosCertificate:
    n = 6
    r3 = math.sqrt(3)
    h1 = (TrigPoly.constant(-1, n) + TrigPoly.cos(1, n) * (2 / r3)) * math.sqrt(r3 / 4)
    h2 = (TrigPoly.sin(1, n) * -2 + TrigPoly.sin(3, n)) * math.sqrt(r3 / 36)
    return SosCertificate(n, facet_functional(n), (h1, h2), "hexagon")


def _pair_roots(roots: np.ndarray, tol: float) -> list[complex]:
    """One root from each conjugate pair, taken from the upper half plane.

    Roots within ``tol`` (relative) of the real axis are treated as real;
    those must come in adjacent pairs (double roots) and each pair is
    replaced by its mean.
    """
    roots = np.asarray(roots, dtype=complex)
    near_real = np.abs(roots.imag) <= tol * np.maximum(1.0, np.abs(roots))
    upper = roots[~near_real & (roots.imag > 0)]
    lower = roots[~near_real & (roots.imag < 0)]
    real = np.sort(roots[near_real].real)
    if len(upper) != len(lower) or len(real) % 2:
        raise ValueError("roots do not come in conjugate pairs")
    for z in upper:
        gap = float(np.min(np.abs(lower - z.conjugate())))
        if gap > math.sqrt(tol) * max(1.0, abs(z)):
            raise ValueError(f"root {z} has no conjugate partner")
    chosen = [complex(z) for z in upper]
    chosen += [complex((a + b) / 2, 0.0) for a, b in zip(real[::2], real[1::2])]
    return chosen


def two_squares_factorization(p: ABCPolyBase, tol: float = PAIR_TOL) -> tuple[ABCPolyBase, ABCPolyBase]:
    """Write a globally nonnegative p as h1^2 + h2^2 (same series kind as p).

    h1 + i h2 = sqrt(lead) * prod (x - z_j) over one root from each
    conjugate pair; real double roots pair with themselves.
    """
    p = interp.trim(p)
    verdict = interp.is_globally_nonnegative(p)
    if not verdict:
        raise ValueError(f"polynomial is negative at x={verdict.witness}")
    kind = type(p)
    lead = interp.leading(p)
    if p.degree() == 0:
        return kind([math.sqrt(lead)]), kind([0.0])
    chosen = _pair_roots(p.roots(), tol)
    # build in the power basis with complex arithmetic, then convert
    coef = np.polynomial.polynomial.polyfromroots(chosen) * math.sqrt(lead)
    if kind is Chebyshev:
        coef = np.polynomial.chebyshev.poly2cheb(coef)
    elif kind is not np.polynomial.Polynomial:
        raise TypeError(f"unsupported series kind {kind.__name__}")
    h1 = kind(np.real(coef))
    h2 = interp.trim(kind(np.imag(coef)), tol=0.0)
    return h1, h2


def _cheb_to_trig(h: ABCPolyBase, n: int) -> TrigPoly:
    """Substitute x = c_1: T_j(c_1) = c_j on the vertex set."""
    coef = h.convert(kind=Chebyshev).coef
    out = TrigPoly(n)
    for j, b in enumerate(coef):
        if b != 0:
            out = out + TrigPoly.cos(j, n) * float(b)
    return out


def hierarchy_certificate(n: int) -> SosCertificate:
    """Two squares of degree <= ceil(N/4) in x = c_1, from the interpolant."""
    if n < 3:
        raise ValueError("N must be >= 3")
    p = interp.theta_rank_interpolant(n)
    h1, h2 = two_squares_factorization(p)
    squares = tuple(_cheb_to_trig(h, n) for h in (h1, h2) if np.any(h.coef != 0))
    return SosCertificate(n, facet_functional(n), squares, "hierarchy")


# -- verification -----------------------------------------------------------

@dataclass
class CertificateReport:
    max_vertex_residual: float
    support: frozenset[int]
    coefficientwise_residual: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (self.max_vertex_residual <= self.tol
                       and self.coefficientwise_residual <= self.tol)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "max_vertex_residual": self.max_vertex_residual,
            "coefficientwise_residual": self.coefficientwise_residual,
            "support": sorted(self.support),
            "tol": self.tol,
            "passed": self.passed,
        }

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}: vertex residual {self.max_vertex_residual:.3e}, "
                f"coefficient residual {self.coefficientwise_residual:.3e}, "
                f"support {sorted(self.support)} (tol {self.tol:g})")


def verify_certificate(cert: SosCertificate, tol: float = 1e-10) -> CertificateReport:
    total = cert.sum_of_squares()
    diff = total - cert.target
    vertex = float(np.max(np.abs(diff.values())))
    return CertificateReport(vertex, cert.support, diff.max_abs_coeff(), tol)


# -- Gram matrices ----------------------------------------------------------

@dataclass(frozen=True)
class GramMatrix:
    n: int
    basis: tuple[RealLabel, ...]
    Q: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.Q).min()) if len(self.basis) else 0.0

    def is_psd(self, tol: float = GRAM_PSD_TOL) -> bool:
        scale = max(1.0, float(np.linalg.norm(self.Q, 2))) if len(self.basis) else 1.0
        return self.min_eigenvalue() >= -tol * scale

    def frequencies(self) -> tuple[int, ...]:
        return tuple(sorted({k for _, k in self.basis}))

    def function(self) -> TrigPoly:
        """T_V(Q) = sum_ij Q_ij b_i b_j as a function on the vertex set."""
        labels, T = gram_map_matrix(self.frequencies(), self.n)
        vals = T @ self.Q.ravel()
        return from_real_basis({lab: float(v) for lab, v in zip(labels, vals) if v != 0}, self.n)

    def factor(self, target: TrigPoly, tol: float = 1e-13) -> SosCertificate:
        """Squares sqrt(lambda) <w, b> from an eigendecomposition of Q."""
        lam, W = np.linalg.eigh(self.Q)
        cutoff = tol * max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
        squares = []
        for t in range(len(lam)):
            if lam[t] <= cutoff:
                continue
            coeffs = dict(zip(self.basis, math.sqrt(lam[t]) * W[:, t]))
            squares.append(from_real_basis(coeffs, self.n))
        return SosCertificate(self.n, target, tuple(squares), "custom")


def _real_coeffs(h: TrigPoly) -> list[dict[RealLabel, float]]:
    re = (h + h.conjugate()) * 0.5
    im = (h - h.conjugate()) * (-0.5j)
    parts = []
    for part in (re, im):
        if part.max_abs_coeff() > 0:
            parts.append(to_real_basis(part))
    return parts


def gram_from_certificate(cert: SosCertificate, V: Iterable[int]) -> GramMatrix:
    """Q = sum of outer products of the real coefficient vectors of the squares.

    A complex square contributes both its real and imaginary parts, since
    |h|^2 = (Re h)^2 + (Im h)^2.
    """
    basis = basis_labels(V, cert.n)
    index = {lab: t for t, lab in enumerate(basis)}
    d = len(basis)
    Q = np.zeros((d, d))
    for h in cert.squares:
        for coeffs in _real_coeffs(h):
            vec = np.zeros(d)
            for lab, c in coeffs.items():
                if lab in index:
                    vec[index[lab]] = c
                elif abs(c) > ALGEBRA_TOL * max(1.0, h.max_abs_coeff()):
                    raise ValueError(f"square uses {lab[0]}{lab[1]}, outside the subspace")
            Q += np.outer(vec, vec)
    return GramMatrix(cert.n, tuple(basis), Q)


def doubling_identity_residual(n: int, theta: float) -> float:
    if n < 3:
        raise ValueError("N must be >= 3")
    a, s1, s2 = math.cos(math.pi / n), math.sin(math.pi / n), math.sin(2 * math.pi / n)
    lhs = (a - math.cos(theta)) / s1
    rhs = (a - math.cos(theta)) ** 2 / s2 + 0.5 * (math.cos(2 * math.pi / n) - math.cos(2 * theta)) / s2
    return abs(lhs - rhs)


def certificate_for(scheme: str, size: int) -> SosCertificate:
    """Dispatch used by the CLI: ``size`` is n for powers-of-two, N otherwise."""
    if scheme == "powers-of-two":
        return powers_of_two_certificate(size)
    if scheme == "hexagon":
        if size != 6:
            raise ValueError("the hexagon scheme needs N = 6")
        return hexagon_certificate()
    if scheme == "hierarchy":
        return hierarchy_certificate(size)
    raise ValueError(f"unknown scheme {scheme!r}")


__all__ = [
    "SCHEMES", "SosCertificate", "CertificateReport", "GramMatrix",
    "facet_functional", "real_support", "powers_of_two_certificate",
    "powers_of_two_coefficient", "powers_of_two_identity_residual",
    "hexagon_certificate", "hierarchy_certificate", "two_squares_factorization",
    "verify_certificate", "gram_from_certificate", "doubling_identity_residual",
    "certificate_for",
]
