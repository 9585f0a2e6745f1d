"""Typical sets and projectors over product eigenbases, stored by type class.

A :class:`TypicalProjector` is diagonal in a product basis.  Positions are
partitioned into groups; all positions of a group share one basis, and
membership of an index sequence depends only on its per-group count
vectors.  Traces are exact integers, masses are computed from multinomial
distributions, so block lengths of several hundred are cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import convolve
from scipy.special import gammaln

from .entropy import INFINITY, CqChannel, classical_divergence, shannon_entropy
from .errors import DimMismatch, InfeasibleScale, ScaleError, TooLarge
from .linalg import (
    as_square,
    eig_hermitian,
    matrix_to_json,
    orthonormal_range,
    partial_trace,
    permute_factors,
    support_projector,
)
from .objects import check_state

LOG2E = math.log2(math.e)
K_CONST = 2 * LOG2E / math.e
DENSE_LIMIT = 4096
ENUMERATION_LIMIT = 2_000_000
_BOUNDARY_TOL = 1e-10


def compositions(n: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``n`` (lexicographic, descending first part)."""
    if parts == 0:
        if n == 0:
            yield ()
        return
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def count_compositions(n: int, parts: int) -> int:
    return math.comb(n + parts - 1, parts - 1) if parts > 0 else int(n == 0)


@lru_cache(maxsize=200_000)
def multinomial(counts: tuple) -> int:
    total, out = 0, 1
    for c in counts:
        total += c
        out *= math.comb(total, c)
    return out


def log2_multinomial(counts: Sequence[int]) -> float:
    n = sum(counts)
    return (math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)) * LOG2E


@dataclass(frozen=True)
class TypeVector:
    """Counts of each symbol in a length-``n`` sequence."""

    counts: tuple

    def __init__(self, counts):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def size(self) -> int:
        return len(self.counts)

    def distribution(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n

    def class_size(self) -> int:
        return multinomial(self.counts)

    @classmethod
    def from_distribution(cls, P, n: int) -> "TypeVector":
        P = np.asarray(P, dtype=float)
        raw = P * n
        counts = np.rint(raw)
        if np.max(np.abs(raw - counts)) > 1e-9 or counts.sum() != n:
            raise ValueError(f"{list(P)} is not a type with denominator {n}")
        return cls(counts.astype(int))

    @classmethod
    def of(cls, seq: Sequence[int], size: int) -> "TypeVector":
        counts = [0] * size
        for x in seq:
            counts[x] += 1
        return cls(counts)

    @classmethod
    def parse(cls, text: str) -> "TypeVector":
        return cls(int(t) for t in text.replace(",", ":").split(":"))


def all_types(n: int, size: int) -> list:
    return [TypeVector(c) for c in compositions(n, size)]


def type_class(t: TypeVector) -> list:
    """All sequences of the given type, lexicographically ordered."""
    out = []

    def rec(prefix, remaining):
        if not any(remaining):
            out.append(tuple(prefix))
            return
        for s, c in enumerate(remaining):
            if c:
                remaining[s] -= 1
                prefix.append(s)
                rec(prefix, remaining)
                prefix.pop()
                remaining[s] += 1

    rec([], list(t.counts))
    return out


def _rank_in_class(seq: Sequence[int], d: int) -> int:
    """Lexicographic rank of ``seq`` among the sequences of its type."""
    remaining = [0] * d
    for s in seq:
        remaining[s] += 1
    rank = 0
    for s in seq:
        for smaller in range(s):
            if remaining[smaller]:
                remaining[smaller] -= 1
                rank += multinomial(tuple(remaining))
                remaining[smaller] += 1
        remaining[s] -= 1
    return rank


def _multinomial_array(m: int, p: np.ndarray) -> np.ndarray:
    """Distribution of the first ``d-1`` counts of ``m`` draws from ``p``, as a dense array."""
    d = len(p)
    if d == 1:
        return np.ones(())
    grids = np.meshgrid(*([np.arange(m + 1)] * (d - 1)), indexing="ij")
    total = sum(grids)
    last = m - total
    valid = last >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(np.where(p > 0, p, 1.0))
        logw = gammaln(m + 1) - gammaln(np.where(valid, last, 0) + 1)
        for j, g in enumerate(grids):
            logw = logw - gammaln(g + 1) + np.where(g > 0, g * logp[j], 0.0)
            if p[j] == 0:
                logw = np.where(g > 0, -np.inf, logw)
        logw = logw + np.where(last > 0, np.where(valid, last, 0) * logp[d - 1], 0.0)
        if p[d - 1] == 0:
            logw = np.where(last > 0, -np.inf, logw)
    return np.where(valid, np.exp(logw), 0.0)


def count_distribution(dists: Sequence[np.ndarray]) -> np.ndarray:
    """Distribution of the count vector for independent, non-identical draws.

    Returns an array over the first ``d-1`` counts; the last count is
    implied by the number of draws.
    """
    d = len(dists[0])
    buckets: dict = {}
    for p in dists:
        key = np.asarray(p, dtype=float).tobytes()
        buckets.setdefault(key, [np.asarray(p, dtype=float), 0])[1] += 1
    out = None
    for p, m in buckets.values():
        arr = _multinomial_array(m, p)
        out = arr if out is None else np.clip(convolve(out, arr), 0, None)
    if d == 1:
        return np.ones(())
    return out


@dataclass(frozen=True)
class TypicalProjector:
    """Projector onto product-basis sequences selected by per-group count vectors.

    ``bases[g]`` holds the basis of group ``g`` as columns, ``group_of[i]`` the
    group of position ``i``.  ``types`` contains the fully included tuples of
    per-group count vectors; ``partial`` maps a single-group count vector to
    the number of its lexicographically first sequences that are included.
    """

    bases: tuple
    group_of: tuple
    types: frozenset
    partial: tuple = ()

    def __post_init__(self):
        d = self.bases[0].shape[0]
        if any(b.shape != (d, d) for b in self.bases):
            raise DimMismatch("all bases must be d x d")
        if any(g < 0 or g >= len(self.bases) for g in self.group_of):
            raise DimMismatch("group index out of range")
        if self.partial and len(self.bases) != 1:
            raise ValueError("partial type classes need a single group")

    @property
    def n(self) -> int:
        return len(self.group_of)

    @property
    def d(self) -> int:
        return self.bases[0].shape[0]

    @property
    def dim(self) -> int:
        return self.d ** self.n

    @property
    def n_groups(self) -> int:
        return len(self.bases)

    @property
    def group_sizes(self) -> tuple:
        sizes = [0] * self.n_groups
        for g in self.group_of:
            sizes[g] += 1
        return tuple(sizes)

    def is_empty(self) -> bool:
        return not self.types and not self.partial

    def trace(self) -> int:
        total = sum(math.prod(multinomial(c) for c in t) for t in self.types)
        return total + sum(k for _, k in self.partial)

    def log2_trace(self) -> float:
        tr = self.trace()
        return math.log2(tr) if tr > 0 else -math.inf

    def counts_of(self, seq: Sequence[int]) -> tuple:
        counts = [[0] * self.d for _ in range(self.n_groups)]
        for g, j in zip(self.group_of, seq):
            counts[g][j] += 1
        return tuple(tuple(c) for c in counts)

    def contains(self, seq: Sequence[int]) -> bool:
        if len(seq) != self.n:
            raise DimMismatch("sequence length differs from n")
        t = self.counts_of(seq)
        if t in self.types:
            return True
        for c, k in self.partial:
            if (c,) == t:
                return _rank_in_class(seq, self.d) < k
        return False

    def log2_weight(self, t: tuple, eigenvalues: Sequence[np.ndarray]) -> float:
        """log2 of the product-state weight of one sequence with count tuple ``t``."""
        total = 0.0
        for counts, q in zip(t, eigenvalues):
            for c, qj in zip(counts, q):
                if c:
                    if qj <= 0:
                        return -math.inf
                    total += c * math.log2(qj)
        return total

    def log2_weights(self, eigenvalues: Sequence[np.ndarray]) -> list:
        """Per-sequence log2 weights of every included class (full and partial)."""
        classes = list(self.types) + [(c,) for c, _ in self.partial]
        return [self.log2_weight(t, eigenvalues) for t in classes]

    def position_distributions(self, states) -> list:
        """Pinch per-position states in this projector's basis."""
        if isinstance(states, np.ndarray) and states.ndim == 2:
            states = [states] * self.n
        if len(states) != self.n:
            raise DimMismatch("need one state per position")
        out = []
        for g, rho in zip(self.group_of, states):
            B = self.bases[g]
            rho = as_square(rho)
            p = np.real(np.einsum("ij,jk,ki->i", B.conj().T, rho, B))
            out.append(np.clip(p, 0, None))
        return out

    def mass(self, states) -> float:
        """``Tr(rho_1 (x) ... (x) rho_n  Pi)`` for a state or a per-position list of states."""
        return self.mass_from_distributions(self.position_distributions(states))

    def mass_from_distributions(self, dists: Sequence[np.ndarray]) -> float:
        """Probability of the included index set under independent per-position distributions."""
        if self.is_empty():
            return 0.0
        per_group = [[] for _ in range(self.n_groups)]
        for g, p in zip(self.group_of, dists):
            per_group[g].append(np.asarray(p, dtype=float))
        iid = [all(np.array_equal(p, ps[0]) for p in ps) for ps in per_group]
        if self.partial and not iid[0]:
            raise ScaleError("partial type classes need identical position distributions")
        if all(iid):
            total = math.fsum(
                math.prod(_class_prob(c, ps[0], len(ps)) for c, ps in zip(t, per_group))
                for t in self.types
            )
            for c, k in self.partial:
                p = per_group[0][0]
                w = math.prod(float(p[j]) ** cj for j, cj in enumerate(c))
                total += k * w
            return float(min(max(total, 0.0), 1.0))
        arrays = [count_distribution(ps) if ps else np.ones(()) for ps in per_group]
        total = 0.0
        for t in self.types:
            prod = 1.0
            for c, arr in zip(t, arrays):
                prod *= float(arr[tuple(c[:-1])]) if arr.ndim else 1.0
            total += prod
        return float(min(max(total, 0.0), 1.0))

    def index_array(self) -> np.ndarray:
        """Included index sequences as rows of an integer array, in lexicographic order."""
        if self.dim > DENSE_LIMIT:
            raise InfeasibleScale(f"dimension {self.dim} exceeds {DENSE_LIMIT}")
        d, n = self.d, self.n
        seqs = np.indices((d,) * n).reshape(n, -1).T if n else np.zeros((1, 0), dtype=int)
        onehot = np.zeros((seqs.shape[0], self.n_groups, d), dtype=np.int64)
        for i, g in enumerate(self.group_of):
            np.add.at(onehot, (np.arange(seqs.shape[0]), g, seqs[:, i]), 1)
        flat = onehot.reshape(seqs.shape[0], -1)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        partial = dict(self.partial)
        keep = np.zeros(seqs.shape[0], dtype=bool)
        for u, row in enumerate(uniq):
            t = tuple(tuple(int(v) for v in c) for c in row.reshape(self.n_groups, d))
            rows = inverse == u
            if t in self.types:
                keep |= rows
            elif self.partial and t[0] in partial:
                idx = np.flatnonzero(rows)[: partial[t[0]]]
                keep[idx] = True
        return seqs[keep]

    def sequences(self):
        """Included index sequences in lexicographic order (small ``n`` only)."""
        for row in self.index_array():
            yield tuple(int(v) for v in row)

    def vector(self, seq: Sequence[int]) -> np.ndarray:
        v = np.ones(1, dtype=complex)
        for g, j in zip(self.group_of, seq):
            v = np.kron(v, self.bases[g][:, j])
        return v

    def factor(self) -> np.ndarray:
        """Matrix whose orthonormal columns span the projector's range."""
        idx = self.index_array()
        k = idx.shape[0]
        if k == 0:
            return np.zeros((self.dim, 0), dtype=complex)
        cols = np.ones((1, k), dtype=complex)
        for i, g in enumerate(self.group_of):
            B = self.bases[g][:, idx[:, i]]
            cols = (cols[:, None, :] * B[None, :, :]).reshape(-1, k)
        return cols

    def dense(self) -> np.ndarray:
        F = self.factor()
        return F @ F.conj().T

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "group_of": list(self.group_of),
            "bases": [matrix_to_json(b) for b in self.bases],
            "types": sorted([[list(c) for c in t] for t in self.types]),
            "partial": [[list(c), int(k)] for c, k in self.partial],
        }


def _class_prob(counts: Sequence[int], p: np.ndarray, m: int) -> float:
    """Probability that ``m`` draws from ``p`` have exactly these counts."""
    logw = log2_multinomial(counts)
    for c, pj in zip(counts, p):
        if c:
            if pj <= 0:
                return 0.0
            logw += c * math.log2(pj)
    return 2.0 ** logw


def _spectrum(rho):
    rho = check_state(rho, 1e-8)
    w, v = eig_hermitian(rho)
    return np.clip(w, 0, None), v


def _single_group(basis: np.ndarray, n: int, counts: Iterable[tuple]) -> TypicalProjector:
    return TypicalProjector((basis,), (0,) * n, frozenset((c,) for c in counts))


def _guard_enumeration(n: int, d: int) -> None:
    if count_compositions(n, d) > ENUMERATION_LIMIT:
        raise ScaleError(f"too many type classes for n={n}, d={d}")


def variance_typical_counts(q: np.ndarray, n: int, alpha: float) -> list:
    """Count vectors with ``|N_j - n q_j| <= alpha sqrt(q_j (1 - q_j)) sqrt(n)`` for every j."""
    d = len(q)
    _guard_enumeration(n, d)
    s = np.sqrt(np.clip(q * (1 - q), 0, None))
    radius = alpha * s * math.sqrt(n) + _BOUNDARY_TOL
    out = []
    for c in compositions(n, d):
        if np.all(np.abs(np.asarray(c) - n * q) <= radius):
            out.append(c)
    return out


def variance_typical_set(P, n: int, alpha: float) -> TypicalProjector:
    """Variance-typical sequences of a distribution, as a diagonal projector."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    P = np.asarray(P, dtype=float)
    return _single_group(np.eye(len(P), dtype=complex), n, variance_typical_counts(P, n, alpha))


def variance_typical_projector(rho, n: int, alpha: float) -> TypicalProjector:
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    q, v = _spectrum(rho)
    return _single_group(v, n, variance_typical_counts(q, n, alpha))


def mu_and_rank(rho) -> tuple:
    """Minimal nonzero eigenvalue ``mu`` of ``sqrt(rho (1 - rho))`` and its rank ``N``."""
    q, _ = _spectrum(rho)
    s = np.sqrt(np.clip(q * (1 - q), 0, None))
    nz = s[s > 1e-12]
    if nz.size == 0:
        return 0.0, 0
    return float(nz.min()), int(nz.size)


@dataclass(frozen=True)
class VarianceBounds:
    chebyshev_mass: float
    hoeffding_mass: float
    log2_weight_low: float
    log2_weight_high: float
    log2_trace_upper: float
    mass_term: float

    def shadow_log2_factor(self) -> float:
        return self.log2_weight_high


def variance_projector_bounds(rho, n: int, alpha: float) -> VarianceBounds:
    """Mass, per-sequence weight and trace bounds for the variance-typical projector."""
    q, _ = _spectrum(rho)
    d = len(q)
    H = shannon_entropy(q)
    mu, N = mu_and_rank(rho)
    hoeff = 2 * N * math.exp(-2 * mu * mu * alpha * alpha) if N else 0.0
    spread = K_CONST * d * alpha * math.sqrt(n)
    return VarianceBounds(
        chebyshev_mass=1 - d / alpha ** 2 if alpha > 0 else -math.inf,
        hoeffding_mass=1 - hoeff,
        log2_weight_low=-n * H - spread,
        log2_weight_high=-n * H + spread,
        log2_trace_upper=n * H + spread,
        mass_term=hoeff,
    )


def variance_shadow_bound(rho, n: int, alpha: float, eta: float) -> float:
    """Lower bound on ``Tr B`` for an eta-shadow of ``rho^n``; returned as log2 (``-inf`` if vacuous)."""
    b = variance_projector_bounds(rho, n, alpha)
    lead = eta - b.mass_term
    if lead <= 0:
        return -math.inf
    q, _ = _spectrum(rho)
    return math.log2(lead) + n * shannon_entropy(q) - K_CONST * len(q) * alpha * math.sqrt(n)


def _group_states(rhos: Sequence) -> tuple:
    """Group identical states; returns (list of distinct states, group index per position)."""
    distinct: list = []
    group_of = []
    for rho in rhos:
        rho = as_square(rho)
        for g, s in enumerate(distinct):
            if s.shape == rho.shape and np.array_equal(s, rho):
                group_of.append(g)
                break
        else:
            distinct.append(rho)
            group_of.append(len(distinct) - 1)
    return distinct, tuple(group_of)


def _product_counts(group_sizes: Sequence[int], supports: Sequence[np.ndarray], d: int):
    """Enumerate tuples of per-group count vectors supported on ``supports[g]``."""
    total = 1
    for m, sup in zip(group_sizes, supports):
        total *= count_compositions(m, len(sup))
    if total > ENUMERATION_LIMIT:
        raise ScaleError(f"{total} type classes exceed the enumeration limit")
    per_group = []
    for m, sup in zip(group_sizes, supports):
        lst = []
        for c in compositions(m, len(sup)):
            full = [0] * d
            for j, cj in zip(sup, c):
                full[j] = cj
            lst.append(tuple(full))
        per_group.append(lst)
    return itertools.product(*per_group)


def entropy_typical_projector(rhos: Sequence, delta: float) -> TypicalProjector:
    """Sequences whose surprisal sum lies within ``delta sqrt(n)`` of the entropy sum."""
    distinct, group_of = _group_states(rhos)
    n = len(group_of)
    spectra = [_spectrum(s) for s in distinct]
    d = spectra[0][1].shape[0]
    sizes = [group_of.count(g) for g in range(len(distinct))]
    supports = [np.flatnonzero(q > 0) for q, _ in spectra]
    surprisal = [np.where(q > 0, -np.log2(np.where(q > 0, q, 1.0)), np.inf) for q, _ in spectra]
    Hsum = sum(m * shannon_entropy(q) for m, (q, _) in zip(sizes, spectra))
    radius = delta * math.sqrt(n) + 1e-9
    keep = []
    for t in _product_counts(sizes, supports, d):
        s = sum(cj * su[j] for c, su in zip(t, surprisal) for j, cj in enumerate(c) if cj)
        if abs(s - Hsum) <= radius:
            keep.append(t)
    return TypicalProjector(tuple(v for _, v in spectra), group_of, frozenset(keep))


def entropy_typical_constant(d: int) -> float:
    """Variance bound ``max{(log 3)^2, (log d)^2}`` for the surprisal of a d-level state."""
    return max(math.log2(3) ** 2, math.log2(d) ** 2)


def constant_typical_projector(rho, n: int, delta: float) -> TypicalProjector:
    """Sequences with ``|N_j - n q_j| <= delta sqrt(n)`` for every eigenvalue index."""
    q, v = _spectrum(rho)
    d = len(q)
    _guard_enumeration(n, d)
    radius = delta * math.sqrt(n) + _BOUNDARY_TOL
    keep = [c for c in compositions(n, d) if np.all(np.abs(np.asarray(c) - n * q) <= radius)]
    return _single_group(v, n, keep)


def constant_typical_size_bound(rho, n: int, delta: float) -> float:
    """log2 of ``(n+1)^d 2^(nH + n d eta(delta/sqrt n))``, valid for ``delta <= sqrt(n)/(2d)``."""
    q, _ = _spectrum(rho)
    d = len(q)
    if delta > math.sqrt(n) / (2 * d) + 1e-12:
        raise ValueError("size bound requires delta <= sqrt(n) / (2 d)")
    t = delta / math.sqrt(n)
    eta = -t * math.log2(t) if t > 0 else 0.0
    return d * math.log2(n + 1) + n * shannon_entropy(q) + n * d * eta


def _basis_for(nu, basis):
    nu = as_square(nu)
    if basis is None:
        w, v = eig_hermitian(nu)
        return np.clip(w, 0, None), v
    B = np.asarray(basis, dtype=complex)
    M = B.conj().T @ nu @ B
    off = M - np.diag(np.diag(M))
    if np.max(np.abs(off)) > 1e-9:
        raise DimMismatch("basis does not diagonalise the state")
    return np.clip(np.real(np.diag(M)), 0, None), B


def exact_type_projector(nu, n: int, basis=None) -> TypicalProjector:
    """Projector onto sequences whose counts equal ``n`` times the eigenvalues of ``nu``.

    Empty when ``n nu`` is not integral.  ``basis`` (columns) must diagonalise
    ``nu``; pass a common eigenbasis when comparing with a commuting state.
    """
    w, v = _basis_for(nu, basis)
    raw = w * n
    counts = np.rint(raw)
    if np.max(np.abs(raw - counts)) > 1e-9 or counts.sum() != n:
        return TypicalProjector((v,), (0,) * n, frozenset())
    return _single_group(v, n, [tuple(int(c) for c in counts)])


def exact_cond_type_projector(V: CqChannel, xn: Sequence[int], bases=None) -> TypicalProjector:
    """Tensor product over letters of exact-type projectors of ``V_x`` on the positions of ``x``."""
    letters = sorted(set(xn))
    group_index = {x: g for g, x in enumerate(letters)}
    group_of = tuple(group_index[x] for x in xn)
    blocks, counts = [], []
    for x in letters:
        m = sum(1 for y in xn if y == x)
        w, v = _basis_for(V[x], None if bases is None else bases[x])
        raw = w * m
        c = np.rint(raw)
        if np.max(np.abs(raw - c)) > 1e-9:
            return TypicalProjector(tuple(_basis_for(V[y], None)[1] for y in letters), group_of, frozenset())
        blocks.append(v)
        counts.append(tuple(int(a) for a in c))
    return TypicalProjector(tuple(blocks), group_of, frozenset([tuple(counts)]))


def _entropy_of_counts(c: Sequence[int]) -> float:
    n = sum(c)
    return shannon_entropy(np.asarray(c, dtype=float) / n)


def bounded_entropy_projector(rho, n: int, L: float, direction: str = "<=", basis=None) -> TypicalProjector:
    """Union of exact-type projectors (in ``rho``'s eigenbasis) with type entropy ``<= L`` or ``>= L``."""
    if direction not in ("<=", ">="):
        raise ValueError("direction must be '<=' or '>='")
    if basis is None:
        _, v = _spectrum(rho)
    else:
        v = np.asarray(basis, dtype=complex)
    d = v.shape[0]
    _guard_enumeration(n, d)
    keep = []
    for c in compositions(n, d):
        h = _entropy_of_counts(c)
        if (h <= L + 1e-12) if direction == "<=" else (h >= L - 1e-12):
            keep.append(c)
    return _single_group(v, n, keep)


def jhhh_projector(basis, n: int, R: float) -> TypicalProjector:
    """Union over basis-diagonal types of entropy at most ``R``."""
    basis = np.asarray(basis, dtype=complex)
    return bounded_entropy_projector(None, n, R, "<=", basis=basis)


def conditional_variance_typical_projector(W: CqChannel, xn: Sequence[int], delta: float) -> TypicalProjector:
    """``(x)_x`` variance-typical projector of ``W_x`` with constant ``delta`` on the positions carrying ``x``."""
    letters = sorted(set(xn))
    group_index = {x: g for g, x in enumerate(letters)}
    group_of = tuple(group_index[x] for x in xn)
    bases, per_letter = [], []
    for x in letters:
        m = sum(1 for y in xn if y == x)
        q, v = _spectrum(W[x])
        bases.append(v)
        per_letter.append(variance_typical_counts(q, m, delta))
    total = math.prod(len(p) for p in per_letter)
    if total > ENUMERATION_LIMIT:
        raise ScaleError("too many type classes")
    return TypicalProjector(tuple(bases), group_of, frozenset(itertools.product(*per_letter)))


def truncation_projector(rho, n: int, rank: int) -> TypicalProjector:
    """Projector onto the ``rank`` most likely eigen-sequences of ``rho^n``."""
    q, v = _spectrum(rho)
    d = len(q)
    _guard_enumeration(n, d)
    logq = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), -np.inf)
    classes = []
    for c in compositions(n, d):
        w = sum(cj * lq for cj, lq in zip(c, logq) if cj)
        classes.append((-w, c))
    classes.sort()
    full, partial, left = [], [], rank
    for _, c in classes:
        if left <= 0:
            break
        size = multinomial(c)
        if size <= left:
            full.append((c,))
            left -= size
        else:
            partial.append((c, left))
            left = 0
    return TypicalProjector((v,), (0,) * n, frozenset(full), tuple(partial))


def type_count_bound(n: int, a: int) -> int:
    return (n + 1) ** a


# Divergence minimisation over diagonal arguments under an entropy constraint.

def _tilt(r: np.ndarray, s: float) -> np.ndarray:
    sup = r > 0
    out = np.zeros_like(r)
    logs = s * np.log(r[sup])
    logs -= logs.max()
    w = np.exp(logs)
    out[sup] = w / w.sum()
    return out


def _solve_tilt(r: np.ndarray, L: float, lo: float, hi: float) -> np.ndarray:
    """Find ``s`` in [lo, hi] with ``H(tilt(r, s)) = L``; entropy decreases in ``s``."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shannon_entropy(_tilt(r, mid)) > L:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return _tilt(r, 0.5 * (lo + hi))


def _upper_tilt(r: np.ndarray, L: float) -> float:
    hi = 2.0
    while shannon_entropy(_tilt(r, hi)) > L and hi < 1e6:
        hi *= 2
    return hi


def min_divergence_entropy_at_most(r, L: float) -> float:
    """``min { D(nu||r) : H(nu) <= L }`` over distributions ``nu``."""
    r = np.asarray(r, dtype=float)
    if shannon_entropy(r) <= L:
        return 0.0
    rmax = r.max()
    top = np.isclose(r, rmax, rtol=0, atol=1e-15).sum()
    if L <= math.log2(top) + 1e-15:
        return -math.log2(rmax) - max(L, 0.0)
    nu = _solve_tilt(r, L, 1.0, _upper_tilt(r, L))
    return classical_divergence(nu, r)


def min_divergence_entropy_at_least(r, L: float) -> float:
    """``min { D(nu||r) : H(nu) >= L }``; infinite when ``L`` exceeds the log of the support size."""
    r = np.asarray(r, dtype=float)
    if shannon_entropy(r) >= L:
        return 0.0
    k = int((r > 0).sum())
    if L > math.log2(k) + 1e-12:
        return INFINITY
    nu = _solve_tilt(r, L, 0.0, 1.0)
    return classical_divergence(nu, r)


def min_cross_entropy_entropy_at_least(r, L: float) -> float:
    """``min { -sum nu log r : H(nu) >= L }``, i.e. ``min {H(nu) + D(nu||r)}`` on that set."""
    r = np.asarray(r, dtype=float)
    k = int((r > 0).sum())
    if L > math.log2(k) + 1e-12:
        return INFINITY
    rmax = r.max()
    top = int(np.isclose(r, rmax, rtol=0, atol=1e-15).sum())
    if L <= math.log2(top) + 1e-15:
        return -math.log2(rmax)
    nu = _solve_tilt(r, L, 0.0, _upper_tilt(r, L))
    sup = nu > 0
    return float(-np.sum(nu[sup] * np.log2(r[sup])))


def universal_mass_bound(rho, n: int, L: float) -> float:
    """Lower bound on ``Tr(rho^n Pi_{H >= L})``: ``1 - (n+1)^d 2^(-n min_{H(nu)<=L} D(nu||rho))``."""
    q, _ = _spectrum(rho)
    d = len(q)
    m = min_divergence_entropy_at_most(q, L)
    return 1 - 2.0 ** (d * math.log2(n + 1) - n * m)


def universal_shadow_bound(rho, n: int, L: float, eta: float) -> float:
    """log2 lower bound on ``Tr B`` for an eta-shadow of ``rho^n`` (``-inf`` if vacuous)."""
    q, _ = _spectrum(rho)
    d = len(q)
    m = min_divergence_entropy_at_most(q, L)
    lead = eta - 2.0 ** (d * math.log2(n + 1) - n * m)
    if lead <= 0:
        return -math.inf
    return math.log2(lead) + n * L + n * m


def shadow_bound(eta: float, lam: float, mu2: float, commuting: bool = False) -> float:
    """Lower bound ``(eta - sqrt(8 lam)) / mu2`` on the trace of an eta-shadow (``(eta - lam) / mu2`` if commuting)."""
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    penalty = lam if commuting else math.sqrt(8 * lam)
    return (eta - penalty) / mu2


def verify_shadow(B, rho, eta: float, tol: float = 1e-9) -> bool:
    """Whether ``0 <= B <= 1`` and ``Tr(rho B) >= eta``."""
    B = as_square(B)
    w = np.linalg.eigvalsh((B + B.conj().T) / 2)
    if w[0] < -tol or w[-1] > 1 + tol:
        return False
    return bool(np.real(np.trace(as_square(rho) @ B)) >= eta - tol)


def blow_up(Pi, l: int, factor_dims: Sequence[int]) -> np.ndarray:
    """Least common support of ``A_(I) Pi A_(I)^*`` over position sets ``|I| = l`` and operators ``A`` on them.

    For a fixed ``I`` the span of all such images is ``supp(Tr_I Pi)`` on the
    remaining factors tensored with the full space on ``I``.
    """
    if isinstance(Pi, TypicalProjector):
        Pi = Pi.dense()
    Pi = as_square(Pi)
    dims = [int(d) for d in factor_dims]
    n = len(dims)
    D = Pi.shape[0]
    if math.prod(dims) != D:
        raise DimMismatch("factor dims do not match the projector")
    l = min(max(int(l), 0), n)
    if D > DENSE_LIMIT or math.comb(n, l) * D > 64 * DENSE_LIMIT:
        raise TooLarge(f"blow-up of a {D}-dimensional projector with l={l}")
    if l == 0:
        return support_projector(Pi)
    cols = []
    for I in itertools.combinations(range(n), l):
        rest = [i for i in range(n) if i not in I]
        if rest:
            red = partial_trace(Pi, dims, rest)
            S = support_projector(red)
        else:
            S = np.ones((1, 1), dtype=complex)
        dI = math.prod(dims[i] for i in I)
        big = np.kron(S, np.eye(dI))
        order = rest + list(I)
        inverse = [order.index(i) for i in range(n)]
        big = permute_factors(big, [dims[i] for i in order], inverse)
        w, v = np.linalg.eigh(big)
        cols.append(v[:, w > 0.5])
    Q = orthonormal_range(np.hstack(cols))
    return Q @ Q.conj().T
