"""Equivariant psd lifts of regular polygons and their verification.

A lift is a list of LMI blocks M_b(z) = C_b + sum_v z_v F_{b,v}, each the
moment matrix of a subspace T_0 + sum_{k in K_b} T_k with z(c_0) = 1.  The
polygon is recovered as the projection (u_1, v_1).

Correctness is checked without a solver: every vertex must lift to a
feasible point, and a Gram decomposition over the blocks must reproduce
every facet functional (so the projection stays inside every facet).
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .momentmap import (
    LinExpr,
    MomentMatrixSymbolic,
    Var,
    basis_labels,
    format_var,
    gram_map_matrix,
    moment_matrix,
    parse_var,
)
from .soscert import (
    SosCertificate,
    facet_functional,
    gram_from_certificate,
    hierarchy_certificate,
    powers_of_two_certificate,
    real_support,
)
from .trigspace import TrigPoly, real_labels, to_real_basis, vertex_angles

PSD_SLACK = 1e-10
GRAM_TOL = 1e-10
SCHEMES = ("chained", "single", "hierarchy")
U0 = ("u", 0)


@dataclass
class LiftDescription:
    n: int
    blocks: list[MomentMatrixSymbolic]
    freqs: list[tuple[int, ...]]
    scheme: str
    projection: tuple[Var, Var] = (("u", 1), ("v", 1))

    def variables(self) -> list[Var]:
        """The variable pool, ordered u_1, v_1, u_2, v_2, ..."""
        pool: set[Var] = set()
        for M in self.blocks:
            pool |= M.variables()
        pool |= set(self.projection)
        return sorted(pool, key=lambda var: (var[1], var[0]))

    def block_sizes(self) -> list[int]:
        return [M.size for M in self.blocks]

    @property
    def total_size(self) -> int:
        return sum(self.block_sizes())

    def __eq__(self, other):
        if not isinstance(other, LiftDescription):
            return NotImplemented
        return (self.n == other.n and self.scheme == other.scheme
                and self.freqs == other.freqs and self.blocks == other.blocks
                and tuple(self.projection) == tuple(other.projection))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "scheme": self.scheme,
            "projection": [format_var(v) for v in self.projection],
            "blocks": [{"K": list(K), "matrix": M.to_json()}
                       for K, M in zip(self.freqs, self.blocks)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> LiftDescription:
        n = int(data["n"])
        blocks = [MomentMatrixSymbolic.from_json(b["matrix"], n) for b in data["blocks"]]
        freqs = [tuple(int(k) for k in b["K"]) for b in data["blocks"]]
        proj = tuple(parse_var(s) for s in data.get("projection", ["u1", "v1"]))
        return cls(n, blocks, freqs, data["scheme"], proj)


def _block(K: Sequence[int], n: int) -> MomentMatrixSymbolic:
    return moment_matrix(K, n).substitute({U0: Fraction(1)})


def _lift(n: int, freq_sets: list[tuple[int, ...]], scheme: str) -> LiftDescription:
    return LiftDescription(n, [_block(K, n) for K in freq_sets], freq_sets, scheme)


def build_chained_lift(n: int) -> LiftDescription:
    """n - 1 blocks of size 3 over {0, 2^i} for the 2^n-gon."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return _lift(2 ** n, [(0, 2 ** i) for i in range(n - 1)], "chained")


def build_single_block_lift(n: int) -> LiftDescription:
    """One block of size 2n - 1 over {0, 1, 2, 4, ..., 2^(n-2)}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return _lift(2 ** n, [(0,) + tuple(2 ** i for i in range(n - 1))], "single")


def build_hierarchy_lift(N: int) -> LiftDescription:
    """One block over {0, 1, ..., ceil(N/4)}."""
    if N < 3:
        raise ValueError("N must be >= 3")
    return _lift(N, [tuple(range(math.ceil(N / 4) + 1))], "hierarchy")


def build_lift(scheme: str, size: int) -> LiftDescription:
    """``size`` is n for the 2^n-gon schemes and N for the hierarchy."""
    if scheme == "chained":
        return build_chained_lift(size)
    if scheme == "single":
        return build_single_block_lift(size)
    if scheme == "hierarchy":
        return build_hierarchy_lift(size)
    raise ValueError(f"unknown lift scheme {scheme!r}")


# -- lift points --------------------------------------------------------------

@dataclass
class LiftPoint:
    n: int
    values: dict[Var, float]

    def projection(self, lift: LiftDescription | None = None) -> tuple[float, float]:
        px, py = lift.projection if lift else (("u", 1), ("v", 1))
        return self.values.get(px, 0.0), self.values.get(py, 0.0)

    def close_to(self, other: LiftPoint, tol: float = 1e-12) -> bool:
        keys = set(self.values) | set(other.values)
        return all(abs(self.values.get(k, 0.0) - other.values.get(k, 0.0)) <= tol for k in keys)


def _angle_point(lift: LiftDescription, theta: float) -> LiftPoint:
    vals = {}
    for kind, k in lift.variables():
        vals[(kind, k)] = math.cos(k * theta) if kind == "u" else math.sin(k * theta)
    return LiftPoint(lift.n, vals)


def vertex_lift_point(lift: LiftDescription, i: int) -> LiftPoint:
    if not 1 <= i <= lift.n:
        raise IndexError(f"vertex index {i} out of range 1..{lift.n}")
    return _angle_point(lift, (2 * i - 1) * math.pi / lift.n)


def barycenter_point(lift: LiftDescription) -> LiftPoint:
    return LiftPoint(lift.n, {v: 0.0 for v in lift.variables()})


def convex_combination(points: Sequence[LiftPoint], weights: Sequence[float]) -> LiftPoint:
    keys: set[Var] = set()
    for p in points:
        keys |= set(p.values)
    vals = {k: float(sum(w * p.values.get(k, 0.0) for p, w in zip(points, weights))) for k in keys}
    return LiftPoint(points[0].n, vals)


def rotate_lift_point(p: LiftPoint, r: int) -> LiftPoint:
    """Rotate each (u_k, v_k) pair by 2 pi k r / N; projection turns by 2 pi r / N."""
    out: dict[Var, float] = {}
    ks = {k for _, k in p.values}
    for k in ks:
        phi = 2 * math.pi * ((k * r) % p.n) / p.n
        u = p.values.get(("u", k), 0.0)
        v = p.values.get(("v", k), 0.0)
        c, s = math.cos(phi), math.sin(phi)
        if ("u", k) in p.values:
            out[("u", k)] = u * c - v * s
        if ("v", k) in p.values:
            out[("v", k)] = v * c + u * s
    return LiftPoint(p.n, out)


# -- numeric evaluation ---------------------------------------------------------

def _compiled(lift: LiftDescription) -> tuple[list[Var], list[tuple[np.ndarray, np.ndarray]]]:
    variables = lift.variables()
    return variables, [M.coefficient_arrays(variables) for M in lift.blocks]


def block_matrices(lift: LiftDescription, p: LiftPoint) -> list[np.ndarray]:
    variables, comp = _compiled(lift)
    x = np.array([p.values.get(v, 0.0) for v in variables])
    return [C + np.tensordot(x, F, axes=1) for C, F in comp]


def min_eigenvalues(lift: LiftDescription, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min eigenvalue and infinity-norm per point (rows: points, columns: variables)."""
    _, comp = _compiled(lift)
    lam = np.full(len(points), np.inf)
    norm = np.zeros(len(points))
    for C, F in comp:
        mats = C[None] + np.tensordot(points, F, axes=1)
        lam = np.minimum(lam, np.linalg.eigvalsh(mats)[:, 0])
        norm = np.maximum(norm, np.abs(mats).sum(axis=2).max(axis=1))
    return lam, norm


def is_feasible(lift: LiftDescription, p: LiftPoint, slack: float = PSD_SLACK) -> bool:
    variables = lift.variables()
    x = np.array([[p.values.get(v, 0.0) for v in variables]])
    lam, norm = min_eigenvalues(lift, x)
    return bool(lam[0] >= -slack * max(1.0, norm[0]))


def _vertex_matrix(lift: LiftDescription) -> np.ndarray:
    theta = vertex_angles(lift.n)
    cols = [np.cos(k * theta) if kind == "u" else np.sin(k * theta) for kind, k in lift.variables()]
    return np.column_stack(cols)


# -- verification ---------------------------------------------------------------

@dataclass
class LiftReport:
    min_vertex_eigenvalue: float
    worst_vertex: int
    vertices_feasible: bool
    gram_residual: float
    gram_min_eigenvalue: float
    pairing_residual: float
    gram_reproduces: bool
    rotation_residual: float
    rotations_pass: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.vertices_feasible and self.gram_reproduces and self.rotations_pass

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
                for k, v in self.__dict__.items()}

    def summary(self) -> str:
        def mark(ok):
            return "pass" if ok else "FAIL"
        return "\n".join([
            f"(a) vertex feasibility: {mark(self.vertices_feasible)} "
            f"(min eigenvalue {self.min_vertex_eigenvalue:.3e} at vertex {self.worst_vertex})",
            f"(b) Gram reproduces facet: {mark(self.gram_reproduces)} "
            f"(coefficient residual {self.gram_residual:.3e}, pairing residual "
            f"{self.pairing_residual:.3e}, Gram min eigenvalue {self.gram_min_eigenvalue:.3e})",
            f"(c) all rotated facets: {mark(self.rotations_pass)} "
            f"(max residual {self.rotation_residual:.3e})",
            "PASS" if self.passed else "FAIL",
        ])


def default_certificate(lift: LiftDescription) -> SosCertificate:
    if lift.scheme in ("chained", "single"):
        return powers_of_two_certificate(int(round(math.log2(lift.n))))
    return hierarchy_certificate(lift.n)


def split_certificate(lift: LiftDescription, cert: SosCertificate) -> list[SosCertificate]:
    """Assign each square to the first block whose frequency set covers it."""
    parts: list[list[TrigPoly]] = [[] for _ in lift.blocks]
    for h in cert.squares:
        supp = real_support(h.support(), cert.n)
        for b, K in enumerate(lift.freqs):
            if supp <= set(K):
                parts[b].append(h)
                break
        else:
            raise ValueError(f"square with support {sorted(supp)} fits no block")
    return [SosCertificate(cert.n, cert.target, tuple(sq), cert.scheme) for sq in parts]


def _rotation_matrix(basis: Sequence[tuple[str, int]], n: int, r: int) -> np.ndarray:
    """Action of rotation by r on real coefficient vectors over ``basis``.

    c_k -> cos(k phi) c_k + sin(k phi) s_k and s_k -> cos(k phi) s_k - sin(k phi) c_k
    with phi = 2 pi r / N; a missing partner (c_{N/2}) is identically 0.
    """
    index = {lab: t for t, lab in enumerate(basis)}
    R = np.zeros((len(basis), len(basis)))
    for t, (kind, k) in enumerate(basis):
        phi = 2 * math.pi * ((k * r) % n) / n
        c, s = math.cos(phi), math.sin(phi)
        R[t, t] = c if k else 1.0
        partner = ("s", k) if kind == "c" else ("c", k)
        if k and partner in index:
            R[index[partner], t] = s if kind == "c" else -s
    return R


def _pairing(M: MomentMatrixSymbolic, Q: np.ndarray) -> dict[Var | None, float]:
    """<M, Q> as an affine expression with float coefficients."""
    out: dict[Var | None, float] = {}
    for i, row in enumerate(M.entries):
        for j, e in enumerate(row):
            q = Q[i, j]
            if q == 0:
                continue
            out[None] = out.get(None, 0.0) + q * float(e.const)
            for var, c in e.terms.items():
                out[var] = out.get(var, 0.0) + q * float(c)
    return out


def verify_lift(lift: LiftDescription, cert: SosCertificate | None = None,
                slack: float = PSD_SLACK, tol: float = GRAM_TOL) -> LiftReport:
    n = lift.n
    if cert is None:
        cert = default_certificate(lift)

    # (a) every vertex lifts to a feasible point
    lam, norm = min_eigenvalues(lift, _vertex_matrix(lift))
    margin = lam + slack * np.maximum(1.0, norm)
    worst = int(np.argmin(margin))
    feasible = bool(margin[worst] >= 0)

    # (b) per-block Gram matrices reproduce the facet functional
    labels = real_labels(n)
    row = {lab: t for t, lab in enumerate(labels)}
    target = np.zeros(len(labels))
    for lab, v in to_real_basis(cert.target).items():
        target[row[lab]] = v
    grams = [gram_from_certificate(part, K) for part, K in zip(split_certificate(lift, cert), lift.freqs)]
    maps = [gram_map_matrix(K, n)[1] for K in lift.freqs]
    total = sum(T @ g.Q.ravel() for T, g in zip(maps, grams))
    gram_res = float(np.max(np.abs(total - target)))
    gram_min = min(g.min_eigenvalue() for g in grams)
    pair: dict = {}
    for M, g in zip(lift.blocks, grams):
        for var, c in _pairing(M, g.Q).items():
            pair[var] = pair.get(var, 0.0) + c
    # with z(c_0) = 1 the pairing must read z(l) = cos(pi/N) - u_1
    expected = {None: math.cos(math.pi / n), ("u", 1): -1.0}
    pair_res = max(abs(pair.get(k, 0.0) - expected.get(k, 0.0)) for k in set(pair) | set(expected))
    if cert.target != facet_functional(n):
        pair_res = 0.0  # the closed form only applies to the unrotated facet
    scale = max(1.0, max(float(np.abs(g.Q).max()) if g.Q.size else 0.0 for g in grams))
    reproduces = gram_res <= tol and pair_res <= tol and gram_min >= -tol * scale

    # (c) rotate the certificate: Q -> R Q R^T keeps every block's support
    rot_res = 0.0
    for r in range(n):
        ell_r = np.zeros(len(labels))
        for lab, v in to_real_basis(cert.target.rotate(r)).items():
            ell_r[row[lab]] = v
        acc = np.zeros(len(labels))
        for T, g in zip(maps, grams):
            R = _rotation_matrix(g.basis, n, r)
            acc += T @ (R @ g.Q @ R.T).ravel()
        rot_res = max(rot_res, float(np.max(np.abs(acc - ell_r))))
    rotations = rot_res <= tol

    return LiftReport(float(lam[worst]), worst + 1, feasible, gram_res, gram_min,
                      float(pair_res), bool(reproduces), rot_res, bool(rotations))


# -- factorization of the structure theorem ---------------------------------------

@dataclass
class FactorizationInput:
    n: int
    freqs: tuple[int, ...]
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=complex)
        self.B = np.asarray(self.B, dtype=complex)
        d = len(self.freqs)
        if self.A.shape != (d, d) or self.B.shape != (d, d):
            raise ValueError("A and B must be d x d with d = number of frequencies")


def extract_certificate_from_factorization(fin: FactorizationInput, target: TrigPoly | None = None,
                                           slack: float = 1e-9) -> SosCertificate:
    """Squares h_i = sum_j conj(v_ij) e_{k_j} from A o B = sum_i v_i v_i^*."""
    H = fin.A * fin.B
    H = (H + H.conj().T) / 2
    lam, W = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    if lam.size and lam[0] < -slack * scale:
        raise ValueError(f"Hadamard product is indefinite (eigenvalue {lam[0]:.3e})")
    squares = []
    for t in range(len(lam)):
        if lam[t] <= slack * scale:
            continue
        v = math.sqrt(lam[t]) * W[:, t]
        squares.append(TrigPoly(fin.n, {k: np.conj(vj) for k, vj in zip(fin.freqs, v)}))
    if target is None:
        target = facet_functional(fin.n)
    return SosCertificate(fin.n, target, tuple(squares), "custom")


def factorization_input_from_certificate(cert: SosCertificate) -> FactorizationInput:
    """A' = all-ones, B' = sum_i conj(a_i) a_i^T from the e_k coefficients a_i."""
    freqs = tuple(sorted(cert.hermitian_support))
    d = len(freqs)
    B = np.zeros((d, d), dtype=complex)
    for h in cert.squares:
        a = np.array([h.coeff(k) for k in freqs])
        B += np.outer(np.conj(a), a)
    return FactorizationInput(cert.n, freqs, np.ones((d, d)), B)


# -- export -----------------------------------------------------------------------

def _fmt(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return repr(float(q))


def export_sdpa_text(lift: LiftDescription) -> str:
    """SDPA sparse format for: sum_v x_v F_v - F_0 >= 0 with F_0 = -C."""
    variables = lift.variables()
    index = {v: t + 1 for t, v in enumerate(variables)}
    lines = [
        f"* ngonlift {lift.scheme} lift, N = {lift.n}",
        "* variables: " + " ".join(format_var(v) for v in variables),
        "* blocks: " + " ; ".join(",".join(str(k) for k in K) for K in lift.freqs),
        "* projection: " + " ".join(format_var(v) for v in lift.projection),
        str(len(variables)),
        str(len(lift.blocks)),
        " ".join(str(s) for s in lift.block_sizes()),
        " ".join("0" for _ in variables),
    ]
    for b, M in enumerate(lift.blocks, start=1):
        for i in range(M.size):
            for j in range(i, M.size):
                e = M.entries[i][j]
                if e.const:
                    lines.append(f"0 {b} {i + 1} {j + 1} {_fmt(-e.const)}")
                for var, c in e.terms.items():
                    lines.append(f"{index[var]} {b} {i + 1} {j + 1} {_fmt(c)}")
    return "\n".join(lines) + "\n"


def export_sdpa(lift: LiftDescription, path) -> None:
    Path(path).write_text(export_sdpa_text(lift))


def parse_sdpa_text(text: str) -> LiftDescription:
    """Read back a file written by :func:`export_sdpa_text`."""
    meta: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("*"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line.strip())
    header = [key for key in meta if key.startswith("ngonlift")]
    if not header or "variables" not in meta or "blocks" not in meta:
        raise ValueError("not an ngonlift SDPA file (missing comment header)")
    words = header[0].split()
    scheme = words[1]
    n = int(header[0].split("N =")[1])
    variables = [parse_var(s) for s in meta["variables"].split()]
    freqs = [tuple(int(k) for k in part.split(",")) for part in meta["blocks"].split(";")]
    proj = tuple(parse_var(s) for s in meta.get("projection", "u1 v1").split())
    m, nblock = int(body[0]), int(body[1])
    sizes = [int(s) for s in body[2].split()]
    if m != len(variables) or nblock != len(freqs) or len(sizes) != nblock:
        raise ValueError("SDPA header disagrees with the comment header")
    consts = [[[Fraction(0)] * s for _ in range(s)] for s in sizes]
    terms: list[list[list[dict]]] = [[[{} for _ in range(s)] for _ in range(s)] for s in sizes]
    for line in body[4:]:
        mat, blk, i, j, val = line.split()
        mat, blk, i, j = int(mat), int(blk) - 1, int(i) - 1, int(j) - 1
        q = Fraction(val)
        for a, b in {(i, j), (j, i)}:
            if mat == 0:
                consts[blk][a][b] = -q
            else:
                terms[blk][a][b][variables[mat - 1]] = q
    blocks = []
    for blk, K in enumerate(freqs):
        basis = basis_labels(K, n)
        if len(basis) != sizes[blk]:
            raise ValueError("block size disagrees with its frequency set")
        entries = [[LinExpr(consts[blk][i][j], terms[blk][i][j]) for j in range(sizes[blk])]
                   for i in range(sizes[blk])]
        blocks.append(MomentMatrixSymbolic(basis, entries, n))
    return LiftDescription(n, blocks, freqs, scheme, proj)


def read_sdpa(path) -> LiftDescription:
    return parse_sdpa_text(Path(path).read_text())


def sdpa_coefficients(text: str) -> set[str]:
    """The distinct coefficient strings appearing in the entries of an SDPA file."""
    body = [line for line in text.splitlines() if line.strip() and not line.startswith("*")]
    return {line.split()[4] for line in body[4:]}


def export_json(lift: LiftDescription, path) -> None:
    Path(path).write_text(json.dumps(lift.to_json(), indent=1))


def read_json(path) -> LiftDescription:
    return LiftDescription.from_json(json.loads(Path(path).read_text()))
