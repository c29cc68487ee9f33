"""Symbolic moment matrices over invariant subspaces of F(N, R).

For K a set of real frequencies, V = sum_{k in K} T_k(N) has the basis
c_0 (if 0 in K) followed by c_k, s_k for each k > 0 in K, where c_{N/2} is
dropped for even N.  The moment matrix M_V(z) has entry (i, j) equal to
z(b_i b_j); products are reduced with the product-to-sum formulas and the
vertex-set identities

    c_{-m} = c_m,  s_{-m} = -s_m,  c_{m+N} = -c_m,  s_{m+N} = -s_m,

all with exact rational coefficients.  The variable u_k stands for z(c_k)
and v_k for z(s_k).
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from fractions import Fraction

import numpy as np

from .trigspace import RealLabel, real_labels

Var = tuple[str, int]  # ("u", k) or ("v", k)


def canonical_label(kind: str, m: int, n: int) -> tuple[int, RealLabel | None]:
    """Rewrite c_m or s_m (any integer m) as sign * c_k / s_k, 0 <= k <= N/2.

    Returns ``(0, None)`` when the function vanishes on the vertex set.
    """
    sign = 1
    m %= 2 * n
    if m >= n:
        m -= n
        sign = -sign
    if 2 * m > n:
        m = n - m
        if kind == "c":
            sign = -sign
    if kind == "s" and m == 0:
        return 0, None
    if kind == "c" and 2 * m == n:
        return 0, None
    return sign, (kind, m)


def _add(acc: dict, label: RealLabel | None, coef: Fraction) -> None:
    if label is None or coef == 0:
        return
    acc[label] = acc.get(label, Fraction(0)) + coef
    if acc[label] == 0:
        del acc[label]


def product(a: RealLabel, b: RealLabel, n: int) -> dict[RealLabel, Fraction]:
    """Reduced real-basis expansion of the pointwise product a * b."""
    (ka, p), (kb, q) = a, b
    half = Fraction(1, 2)
    if ka == "c" and kb == "c":
        terms = [("c", p + q, half), ("c", p - q, half)]
    elif ka == "s" and kb == "s":
        terms = [("c", p - q, half), ("c", p + q, -half)]
    elif ka == "c" and kb == "s":
        terms = [("s", p + q, half), ("s", q - p, half)]
    else:
        terms = [("s", p + q, half), ("s", p - q, half)]
    acc: dict[RealLabel, Fraction] = {}
    for kind, m, coef in terms:
        sign, lab = canonical_label(kind, m, n)
        _add(acc, lab, coef * sign)
    return acc


def basis_labels(K: Iterable[int], n: int) -> list[RealLabel]:
    ks = sorted(set(K))
    for k in ks:
        if not 0 <= k <= n // 2:
            raise ValueError(f"frequency {k} outside 0..{n // 2}")
    out: list[RealLabel] = []
    for k in ks:
        if k == 0:
            out.append(("c", 0))
            continue
        if 2 * k != n:
            out.append(("c", k))
        out.append(("s", k))
    return out


def product_table(K: Iterable[int], n: int) -> list[list[dict[RealLabel, Fraction]]]:
    basis = basis_labels(K, n)
    return [[product(a, b, n) for b in basis] for a in basis]


# -- affine expressions in the moment variables ------------------------------

class LinExpr:
    """const + sum coef * var with exact rational coefficients."""

    __slots__ = ("const", "terms")

    def __init__(self, const=0, terms: Mapping[Var, Fraction] | None = None):
        self.const = Fraction(const)
        self.terms = {v: Fraction(c) for v, c in sorted((terms or {}).items()) if c != 0}

    @classmethod
    def from_expansion(cls, expansion: Mapping[RealLabel, Fraction]) -> LinExpr:
        return cls(0, {("u" if kind == "c" else "v", k): c for (kind, k), c in expansion.items()})

    def substitute(self, values: Mapping[Var, Fraction]) -> LinExpr:
        const = self.const
        terms = {}
        for var, c in self.terms.items():
            if var in values:
                const += c * Fraction(values[var])
            else:
                terms[var] = c
        return LinExpr(const, terms)

    def variables(self) -> set[Var]:
        return set(self.terms)

    def evaluate(self, assignment: Mapping[Var, float]) -> float:
        total = float(self.const)
        for var, c in self.terms.items():
            if var not in assignment:
                raise KeyError(f"no value for variable {format_var(var)}")
            total += float(c) * assignment[var]
        return total

    def scale(self, factor) -> LinExpr:
        f = Fraction(factor)
        return LinExpr(self.const * f, {v: c * f for v, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, LinExpr):
            return NotImplemented
        return self.const == other.const and self.terms == other.terms

    def __hash__(self):
        return hash((self.const, tuple(self.terms.items())))

    def __repr__(self):
        return f"LinExpr({self})"

    def __str__(self):
        parts = []
        if self.const:
            parts.append(_fmt_frac(self.const))
        for var, c in self.terms.items():
            name = format_var(var)
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append("-" + name)
            else:
                parts.append(f"{_fmt_frac(c)}*{name}")
        return " + ".join(parts).replace("+ -", "- ") or "0"

    def to_json(self) -> dict:
        return {
            "const": str(self.const),
            "u": {str(k): str(c) for (kind, k), c in self.terms.items() if kind == "u"},
            "v": {str(k): str(c) for (kind, k), c in self.terms.items() if kind == "v"},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> LinExpr:
        terms = {("u", int(k)): Fraction(c) for k, c in data.get("u", {}).items()}
        terms.update({("v", int(k)): Fraction(c) for k, c in data.get("v", {}).items()})
        return cls(Fraction(data.get("const", "0")), terms)


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_var(var: Var) -> str:
    return f"{var[0]}{var[1]}"


def parse_var(name: str) -> Var:
    return (name[0], int(name[1:]))


class MomentMatrixSymbolic:
    """Square symmetric matrix of LinExpr entries over a labelled basis."""

    def __init__(self, basis: list[RealLabel], entries: list[list[LinExpr]], n: int):
        self.basis = list(basis)
        self.entries = [list(row) for row in entries]
        self.n = n

    @property
    def size(self) -> int:
        return len(self.basis)

    def __getitem__(self, ij) -> LinExpr:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, MomentMatrixSymbolic):
            return NotImplemented
        return self.basis == other.basis and self.entries == other.entries and self.n == other.n

    def is_symmetric(self) -> bool:
        d = self.size
        return all(self.entries[i][j] == self.entries[j][i] for i in range(d) for j in range(d))

    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for row in self.entries:
            for e in row:
                out |= e.variables()
        return out

    def substitute(self, values: Mapping[Var, Fraction]) -> MomentMatrixSymbolic:
        return MomentMatrixSymbolic(self.basis,
                                    [[e.substitute(values) for e in row] for row in self.entries],
                                    self.n)

    def scale(self, factor) -> MomentMatrixSymbolic:
        return MomentMatrixSymbolic(self.basis,
                                    [[e.scale(factor) for e in row] for row in self.entries],
                                    self.n)

    def coefficient_arrays(self, variables: list[Var]) -> tuple[np.ndarray, np.ndarray]:
        """Dense (const, per-variable) float arrays: M = C + sum_v x_v F_v."""
        d = self.size
        const = np.zeros((d, d))
        coef = np.zeros((len(variables), d, d))
        index = {v: t for t, v in enumerate(variables)}
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                const[i, j] = float(e.const)
                for var, c in e.terms.items():
                    coef[index[var], i, j] = float(c)
        return const, coef

    def pretty(self) -> str:
        cells = [[str(e) for e in row] for row in self.entries]
        labels = [f"{k}{m}" for k, m in self.basis]
        width = max([len(c) for row in cells for c in row] + [len(s) for s in labels])
        lines = [" " * 5 + " ".join(s.rjust(width) for s in labels)]
        for lab, row in zip(labels, cells):
            lines.append(lab.ljust(5) + " ".join(c.rjust(width) for c in row))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "basis": [f"{k}{m}" for k, m in self.basis],
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: Mapping, n: int) -> MomentMatrixSymbolic:
        basis = [(s[0], int(s[1:])) for s in data["basis"]]
        entries = [[LinExpr.from_json(e) for e in row] for row in data["entries"]]
        return cls(basis, entries, n)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def moment_matrix(K: Iterable[int], n: int) -> MomentMatrixSymbolic:
    basis = basis_labels(K, n)
    table = product_table(K, n)
    entries = [[LinExpr.from_expansion(cell) for cell in row] for row in table]
    return MomentMatrixSymbolic(basis, entries, n)


def instantiate(M: MomentMatrixSymbolic, assignment: Mapping[Var, float]) -> np.ndarray:
    d = M.size
    out = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            out[i, j] = out[j, i] = M.entries[i][j].evaluate(assignment)
    return out


def vertex_assignment(theta: float, variables: Iterable[Var]) -> dict[Var, float]:
    """The evaluation functional z(f) = f(theta) on the given variables."""
    out = {}
    for kind, k in variables:
        out[(kind, k)] = float(np.cos(k * theta) if kind == "u" else np.sin(k * theta))
    return out


def all_variables(n: int) -> list[Var]:
    return [("u" if kind == "c" else "v", k) for kind, k in real_labels(n)]


def gram_map_matrix(K: Iterable[int], n: int) -> tuple[list[RealLabel], np.ndarray]:
    """The Gram-to-function map T_V as a dense matrix.

    Returns the real-basis labels indexing the rows and the matrix T with
    T @ Q.ravel() = real coefficients of sum_ij Q_ij b_i b_j.
    """
    labels = real_labels(n)
    row = {lab: r for r, lab in enumerate(labels)}
    table = product_table(K, n)
    d = len(table)
    T = np.zeros((len(labels), d * d))
    for i in range(d):
        for j in range(d):
            for lab, c in table[i][j].items():
                T[row[lab], i * d + j] += float(c)
    return labels, T


def gram_to_function(Q: np.ndarray, K: Iterable[int], n: int) -> dict[RealLabel, float]:
    labels, T = gram_map_matrix(K, n)
    vals = T @ np.asarray(Q, dtype=float).ravel()
    return {lab: float(v) for lab, v in zip(labels, vals) if v != 0}
