"""Functions on the vertex set of the regular N-gon.

A function is stored by its coefficients over the twisted Fourier basis

    e_k(theta) = exp(-i k pi / N) * exp(i k theta),   k in Z_N,

evaluated at the vertex angles theta_i = (2i - 1) pi / N.  With this phase
convention e_{k+N} == e_k and e_k(theta_i) = omega^(k (i-1)) where
omega = exp(2 pi i / N), so products never pick up sign errors.

The real basis view uses c_k = cos(k theta) and s_k = sin(k theta) for
k = 0 .. floor(N/2), with s_0 = 0 and (for even N) c_{N/2} = 0.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Mapping

import numpy as np

ALGEBRA_TOL = 1e-12
IDENTITY_TOL = 1e-9


class ModulusMismatch(ValueError):
    pass


def vertex_angle(i: int, n: int) -> float:
    """Angle of vertex ``i`` (1-based) of the regular ``n``-gon."""
    if not 1 <= i <= n:
        raise IndexError(f"vertex index {i} out of range 1..{n}")
    return (2 * i - 1) * math.pi / n


def vertex_angles(n: int) -> np.ndarray:
    return (2 * np.arange(1, n + 1) - 1) * np.pi / n


def _check_modulus(n: int) -> None:
    if n < 3:
        raise ValueError(f"modulus must be >= 3, got {n}")


class TrigPoly:
    """Immutable element of F(N, C) stored as ``{k: coefficient of e_k}``.

    Only exact zeros are pruned; near-zero coefficients are kept so that
    residual accounting stays with the verification code.
    """

    __slots__ = ("_n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[int, complex] | None = None):
        _check_modulus(n)
        acc: dict[int, complex] = {}
        for k, c in (coeffs or {}).items():
            k = int(k) % n
            acc[k] = acc.get(k, 0j) + complex(c)
        self._n = n
        self._coeffs = {k: c for k, c in sorted(acc.items()) if c != 0}

    # -- constructors -------------------------------------------------------

    @classmethod
    def basis(cls, k: int, n: int, coeff: complex = 1.0) -> TrigPoly:
        return cls(n, {k: coeff})

    @classmethod
    def constant(cls, value: complex, n: int) -> TrigPoly:
        return cls(n, {0: value})

    @classmethod
    def cos(cls, k: int, n: int) -> TrigPoly:
        """c_k for any integer k; the phase uses the unreduced k."""
        ph = cmath.exp(1j * k * math.pi / n)
        return cls(n, {k: ph / 2}) + cls(n, {-k: ph.conjugate() / 2})

    @classmethod
    def sin(cls, k: int, n: int) -> TrigPoly:
        ph = cmath.exp(1j * k * math.pi / n)
        return cls(n, {k: ph / 2j}) - cls(n, {-k: ph.conjugate() / 2j})

    # -- accessors ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def coeffs(self) -> dict[int, complex]:
        return dict(self._coeffs)

    def coeff(self, k: int) -> complex:
        return self._coeffs.get(k % self._n, 0j)

    def support(self) -> frozenset[int]:
        return frozenset(self._coeffs)

    def dense(self) -> np.ndarray:
        out = np.zeros(self._n, dtype=complex)
        for k, c in self._coeffs.items():
            out[k] = c
        return out

    @classmethod
    def from_dense(cls, vec: np.ndarray) -> TrigPoly:
        vec = np.asarray(vec, dtype=complex)
        return cls(len(vec), {k: c for k, c in enumerate(vec) if c != 0})

    # -- algebra ------------------------------------------------------------

    def _same(self, other: TrigPoly) -> None:
        if self._n != other._n:
            raise ModulusMismatch(f"moduli differ: {self._n} vs {other._n}")

    def __add__(self, other):
        if isinstance(other, TrigPoly):
            self._same(other)
            acc = dict(self._coeffs)
            for k, c in other._coeffs.items():
                acc[k] = acc.get(k, 0j) + c
            return TrigPoly(self._n, acc)
        return self + TrigPoly.constant(other, self._n)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(self._n, {k: -c for k, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return trig_mul(self, other)
        return TrigPoly(self._n, {k: c * other for k, c in self._coeffs.items()})

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return self * (1 / scalar)

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self._n == other._n and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self._n, tuple(self._coeffs.items())))

    def __repr__(self):
        terms = " + ".join(f"({c:.6g})e{k}" for k, c in self._coeffs.items()) or "0"
        return f"TrigPoly(n={self._n}: {terms})"

    def conjugate(self) -> TrigPoly:
        return conjugate(self)

    def abs2(self) -> TrigPoly:
        """The hermitian square |f|^2 = f^* f."""
        return trig_mul(conjugate(self), self)

    def rotate(self, r: int) -> TrigPoly:
        return rotate(self, r)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def is_real(self, tol: float = ALGEBRA_TOL) -> bool:
        return (self - conjugate(self)).max_abs_coeff() <= tol

    # -- evaluation ---------------------------------------------------------

    def __call__(self, i: int) -> complex:
        return eval_at_vertex(self, i)

    def values(self) -> np.ndarray:
        """Values at vertices 1..N, via an inverse DFT."""
        return self._n * np.fft.ifft(self.dense())

    def eval_angle(self, theta) -> np.ndarray:
        """Trigonometric-polynomial extension off the vertex set.

        Frequencies are taken as their canonical residue 0..N-1, so this is
        only meaningful for comparing against identities written with that
        choice of representative.
        """
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in self._coeffs.items():
            out += c * np.exp(1j * k * (theta - math.pi / self._n))
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self._n,
            "coeffs": [{"k": k, "re": c.real, "im": c.imag} for k, c in self._coeffs.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> TrigPoly:
        return cls(int(data["n"]), {int(t["k"]): complex(t["re"], t["im"]) for t in data["coeffs"]})


def trig_mul(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """Pointwise product; frequencies add modulo N."""
    f._same(g)
    n = f.n
    acc: dict[int, complex] = {}
    for k, a in f._coeffs.items():
        for kk, b in g._coeffs.items():
            key = (k + kk) % n
            acc[key] = acc.get(key, 0j) + a * b
    return TrigPoly(n, acc)


def conjugate(f: TrigPoly) -> TrigPoly:
    """Complex conjugate, using e_k^* = e_{-k}."""
    return TrigPoly(f.n, {-k: c.conjugate() for k, c in f._coeffs.items()})


def eval_at_vertex(f: TrigPoly, i: int) -> complex:
    theta = vertex_angle(i, f.n)
    return sum(
        (c * cmath.exp(-1j * k * math.pi / f.n) * cmath.exp(1j * k * theta)
         for k, c in f._coeffs.items()),
        0j,
    )


def rotate(f: TrigPoly, r: int) -> TrigPoly:
    """``result(theta) = f(theta - 2 pi r / N)`` on the vertex set."""
    n = f.n
    return TrigPoly(n, {k: c * cmath.exp(-2j * math.pi * ((k * r) % n) / n)
                        for k, c in f._coeffs.items()})


# -- real basis -------------------------------------------------------------

RealLabel = tuple[str, int]


def real_labels(n: int) -> list[RealLabel]:
    """All c_k / s_k labels spanning F(N, R), in canonical order."""
    out: list[RealLabel] = []
    for k in range(n // 2 + 1):
        if not (2 * k == n):
            out.append(("c", k))
        if k != 0:
            out.append(("s", k))
    return out


def to_real_basis(f: TrigPoly, tol: float = IDENTITY_TOL) -> dict[RealLabel, float]:
    """Expand a real-valued function in the c_k / s_k basis.

    Raises ``ValueError`` if ``f`` is not real-valued within ``tol``.
    """
    n = f.n
    scale = max(1.0, f.max_abs_coeff())
    if (f - conjugate(f)).max_abs_coeff() > tol * scale:
        raise ValueError("function is not real-valued")
    out: dict[RealLabel, float] = {}
    for k in range(n // 2 + 1):
        a = f.coeff(k)
        if k == 0:
            out[("c", 0)] = a.real
        elif 2 * k == n:
            # e_{N/2} coincides with s_{N/2}
            out[("s", k)] = a.real
        else:
            b = a * cmath.exp(-1j * k * math.pi / n)
            out[("c", k)] = 2 * b.real
            out[("s", k)] = -2 * b.imag
    return {lab: v for lab, v in out.items() if v != 0}


def from_real_basis(coeffs: Mapping[RealLabel, float], n: int) -> TrigPoly:
    out = TrigPoly(n)
    for (kind, k), v in coeffs.items():
        base = TrigPoly.cos(k, n) if kind == "c" else TrigPoly.sin(k, n)
        out = out + base * v
    return out


# -- frequency geometry -----------------------------------------------------

def cycle_distance(k: int, kk: int, n: int) -> int:
    """Graph distance between two frequencies on the N-cycle."""
    d = (k - kk) % n
    return min(d, n - d)


def set_distance(a: Iterable[int], b: Iterable[int], n: int) -> int:
    return min(cycle_distance(x, y, n) for x in a for y in b)


def in_diameter(K: Iterable[int], n: int) -> int:
    """Smallest r such that K fits in a cyclic interval [x, x + r].

    Computed as N minus the largest cyclic gap.  For K = Z_N this gives
    N - 1, not the value N quoted in some texts; nothing downstream uses it.
    """
    members = sorted({k % n for k in K})
    if not members:
        raise ValueError("in-diameter of an empty set")
    gaps = [b - a for a, b in zip(members, members[1:])]
    gaps.append(members[0] + n - members[-1])
    return n - max(gaps)


def normalize_freqs(K: Iterable[int], n: int) -> tuple[int, ...]:
    members = tuple(sorted({int(k) % n for k in K}))
    return members
