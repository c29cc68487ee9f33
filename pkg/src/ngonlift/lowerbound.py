"""Valid clusterings and separating functionals for frequency sets.

A frequency set K in Z_N with a valid clustering cannot support a
sum-of-squares certificate of the facet functional l: the functional L
below is nonnegative on every |h|^2 with h supported on K, yet L(l) < 0.
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .soscert import facet_functional
from .trigspace import TrigPoly, cycle_distance, in_diameter, normalize_freqs, set_distance

SAMPLES = 200
POSITIVITY_TOL = 1e-10


class InvariantBreach(AssertionError):
    """An invariant of the greedy clustering proof failed at run time."""


def mod_star(k: int, n: int) -> int:
    """Representative of k mod N in {-ceil(N/2)+1, ..., floor(N/2)}."""
    if n < 3:
        raise ValueError("N must be >= 3")
    r = k % n
    return r - n if r > n // 2 else r


@dataclass(frozen=True)
class Clustering:
    n: int
    clusters: tuple[frozenset[int], ...]
    gamma: int
    distances: tuple[int, ...] = ()
    prefix_sums: tuple[int, ...] = ()
    merges: int = 0

    @property
    def K(self) -> frozenset[int]:
        return frozenset().union(*self.clusters) if self.clusters else frozenset()

    def to_json(self) -> list[list[int]]:
        return [sorted(c) for c in self.clusters]


def is_valid_clustering(c: Clustering, K: Iterable[int] | None = None) -> bool:
    n = c.n
    if not c.clusters or any(not cl for cl in c.clusters):
        return False
    seen: set[int] = set()
    for cl in c.clusters:
        if seen & cl:
            return False
        seen |= cl
    if K is not None and seen != set(normalize_freqs(K, n)):
        return False
    if not (1 <= c.gamma and 2 * c.gamma < n):
        return False
    if any(in_diameter(cl, n) > c.gamma for cl in c.clusters):
        return False
    return all(set_distance(a, b, n) > c.gamma
               for a, b in itertools.combinations(c.clusters, 2))


def _sorted_pairs(K: tuple[int, ...], n: int) -> list[tuple[int, int, int]]:
    pairs = [(cycle_distance(a, b, n), a, b) for a, b in itertools.combinations(K, 2)]
    pairs.sort()
    return pairs


def _cluster_gamma(clusters, n: int) -> int:
    return max(1, max(in_diameter(cl, n) for cl in clusters))


def greedy_clustering(K: Iterable[int], n: int, check_invariants: bool = True) -> Clustering | None:
    """Agglomerate the closest pairs until the clustering is valid.

    Pairs are processed by distance, ties broken by (min element, max
    element).  After the i-th merge every two clusters are at distance at
    least d_{i+1} and every cluster has in-diameter at most S_i.
    """
    ks = normalize_freqs(K, n)
    if not ks:
        raise ValueError("K must be nonempty")
    pairs = _sorted_pairs(ks, n)
    dists = tuple(d for d, _, _ in pairs)
    sums = tuple(itertools.accumulate(dists))

    owner = {k: i for i, k in enumerate(ks)}
    members: dict[int, set[int]] = {i: {k} for i, k in enumerate(ks)}

    def snapshot(gamma: int, merges: int) -> Clustering:
        clusters = tuple(sorted((frozenset(m) for m in members.values()), key=min))
        return Clustering(n, clusters, gamma, dists, sums, merges)

    start = snapshot(1, 0)
    if is_valid_clustering(start):
        return start

    merges = 0
    for i in range(1, len(ks)):
        _, a, b = pairs[i - 1]
        ca, cb = owner[a], owner[b]
        if ca != cb:
            for k in members[cb]:
                owner[k] = ca
            members[ca] |= members.pop(cb)
            merges += 1
        if check_invariants:
            _check_invariants(members, n, i, dists, sums)
        cand = snapshot(_cluster_gamma(members.values(), n), merges)
        if is_valid_clustering(cand):
            return cand
    return None


def _check_invariants(members, n, i, dists, sums) -> None:
    groups = list(members.values())
    if i < len(dists):
        for a, b in itertools.combinations(groups, 2):
            if set_distance(a, b, n) < dists[i]:
                raise InvariantBreach(f"after step {i}: clusters closer than d_{i + 1}")
    for g in groups:
        if in_diameter(g, n) > sums[i - 1]:
            raise InvariantBreach(f"after step {i}: in-diameter exceeds S_{i}")


@dataclass(frozen=True)
class SeparatingFunctional:
    """L(e_k) = exp(-i pi mod*(k) / N) if d(0, k) <= gamma, else 0."""

    n: int
    gamma: int

    def __call__(self, k: int) -> complex:
        if cycle_distance(0, k, self.n) > self.gamma:
            return 0j
        return cmath.exp(-1j * math.pi * mod_star(k, self.n) / self.n)

    def values(self) -> dict[int, complex]:
        """The nonzero values, keyed by residue 0..N-1."""
        return {k % self.n: self(k) for k in range(-self.gamma, self.gamma + 1)}

    def apply(self, f: TrigPoly) -> complex:
        if f.n != self.n:
            raise ValueError("modulus mismatch")
        return sum((c * self(k) for k, c in f.coeffs.items()), 0j)

    def gram(self, freqs: Iterable[int]) -> np.ndarray:
        """G with h^* G h = L(|h|^2) for coefficient vectors h over freqs."""
        ks = list(freqs)
        return np.array([[self(kk - k) for kk in ks] for k in ks])


def separating_functional(gamma: int, n: int) -> SeparatingFunctional:
    if not (1 <= gamma and 2 * gamma < n):
        raise ValueError(f"gamma must satisfy 1 <= gamma < N/2, got {gamma}")
    return SeparatingFunctional(n, gamma)


@dataclass
class RefutationReport:
    n: int
    K: tuple[int, ...]
    clustering: Clustering
    L_ell: complex
    min_L_h2: float
    max_abs_imag: float

    @property
    def gamma(self) -> int:
        return self.clustering.gamma

    @property
    def sound(self) -> bool:
        return (self.L_ell.real < 0 and self.min_L_h2 >= -POSITIVITY_TOL
                and self.max_abs_imag <= POSITIVITY_TOL)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "K": list(self.K),
            "clusters": self.clustering.to_json(),
            "gamma": self.gamma,
            "L_ell": self.L_ell.real,
            "min_L_h2": self.min_L_h2,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def random_coefficients(rng: np.random.Generator, size) -> np.ndarray:
    """Complex numbers drawn uniformly from the unit disk."""
    r = np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def refute_sos_valid(K: Iterable[int], n: int, rng: np.random.Generator | None = None,
                     samples: int = SAMPLES) -> RefutationReport | None:
    ks = normalize_freqs(K, n)
    c = greedy_clustering(ks, n)
    if c is None:
        return None
    L = separating_functional(c.gamma, n)
    ell = L.apply(facet_functional(n))
    rng = rng if rng is not None else np.random.default_rng(0)
    G = L.gram(ks)
    H = random_coefficients(rng, (samples, len(ks)))
    vals = np.einsum("si,ij,sj->s", H.conj(), G, H)
    return RefutationReport(n, ks, c, complex(ell), float(vals.real.min()),
                            float(np.abs(vals.imag).max()))


def cluster_square_identity(h: dict[int, complex], n: int) -> tuple[float, float]:
    """L(|h|^2) versus |sum_k h_k e^{-i pi mod*(k)/N}|^2 for h on [0, gamma]."""
    gamma = max(1, max(h) - min(h))
    L = separating_functional(gamma, n)
    f = TrigPoly(n, h)
    lhs = L.apply(f.abs2())
    rhs = abs(sum(c * cmath.exp(-1j * math.pi * mod_star(k, n) / n) for k, c in h.items())) ** 2
    return lhs.real, rhs


@dataclass
class LogBoundStats:
    n: int
    trials: int
    successes: int
    max_size: int
    single_cluster: int
    no_consecutive: int
    general: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def log_bound_check(n: int, trials: int, rng: np.random.Generator | None = None,
                    max_size: int | None = None) -> LogBoundStats:
    """Greedy clustering on random K with |K| < ln(N/2).

    Sets with in-diameter < N/2 and sets with no distance-1 pair are
    counted separately, since they are covered by simpler arguments.
    """
    if n < 8:
        raise ValueError("N must be >= 8")
    rng = rng if rng is not None else np.random.default_rng(0)
    bound = math.log(n / 2)
    top = math.ceil(bound) - 1
    if max_size is not None:
        top = min(top, max_size)
    if top < 1:
        raise ValueError("ln(N/2) leaves no admissible set size")
    succ = single = nocons = general = 0
    for _ in range(trials):
        size = int(rng.integers(1, top + 1))
        ks = normalize_freqs(rng.choice(n, size=size, replace=False).tolist(), n)
        if 2 * in_diameter(ks, n) < n:
            single += 1
        elif all(cycle_distance(a, b, n) > 1 for a, b in itertools.combinations(ks, 2)):
            nocons += 1
        else:
            general += 1
        if greedy_clustering(ks, n) is not None:
            succ += 1
    return LogBoundStats(n, trials, succ, top, single, nocons, general)


def geometric_set(n: int, size: int) -> tuple[int, ...]:
    """{0, 1, 3, 7, 15, ...}: consecutive gaps doubling."""
    return normalize_freqs([2 ** i - 1 for i in range(size)], n)
