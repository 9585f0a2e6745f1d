"""Entropy and information quantities on tensor-factor systems, in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimMismatch,
    FlagMissing,
    OverlappingSets,
    SizeMismatch,
    ThetaOutOfRange,
)
from .linalg import (
    HERM_TOL,
    RANK_TOL,
    as_square,
    eig_hermitian,
    eigvals_hermitian,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
)
from .objects import KrausChannel, apply_channel, check_state, environment_state, purify

# Value used for a divergence whose first argument leaves the support of the second.
INFINITY = math.inf

SUPPORT_RESIDUAL_TOL = 1e-7


def binary_entropy(x: float) -> float:
    if not -1e-12 <= x <= 1 + 1e-12:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def eta_function(t: float) -> float:
    """``-t log t`` with ``eta(0) = 0``."""
    return 0.0 if t <= 0 else float(-t * math.log2(t))


def classical_divergence(p, q) -> float:
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DimMismatch("distributions of different size")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return INFINITY
    return float(max(0.0, np.sum(p[mask] * (np.log2(p[mask]) - np.log2(q[mask])))))


def von_neumann_entropy(rho) -> float:
    w = np.clip(eigvals_hermitian(rho), 0, None)
    return shannon_entropy(w)


def relative_entropy(rho, sigma) -> float:
    """Quantum divergence in bits; ``INFINITY`` when supp rho is not inside supp sigma."""
    rho = as_square(rho)
    sigma = as_square(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatch("states differ in dimension")
    r, rv = eig_hermitian(rho)
    s, sv = eig_hermitian(sigma)
    keep_s = s > RANK_TOL
    S = sv[:, keep_s]
    big = r > RANK_TOL
    for v in rv[:, big].T:
        resid = v - S @ (S.conj().T @ v)
        if np.linalg.norm(resid) > SUPPORT_RESIDUAL_TOL:
            return INFINITY
    rp = r[big]
    first = float(np.sum(rp * np.log2(rp)))
    overlaps = np.real(np.einsum("ij,jk,ki->i", S.conj().T, rho, S))
    second = float(np.sum(overlaps * np.log2(s[keep_s])))
    return max(0.0, first - second)


def pinching(rho, projectors: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_k P_k rho P_k`` for an orthogonal resolution of the identity."""
    rho = as_square(rho)
    return sum(P @ rho @ P for P in projectors)


def fannes_bound(theta: float, d: int) -> float:
    """Continuity bound ``-theta log(theta/d)`` on ``|H(rho) - H(sigma)|`` for trace-norm distance ``theta <= 1/2``."""
    if not 0 <= theta <= 0.5 + 1e-12:
        raise ThetaOutOfRange(f"theta = {theta} outside [0, 1/2]")
    if theta == 0:
        return 0.0
    return float(-theta * math.log2(theta / d))


def fano_bound(pe: float, support_size: int) -> float:
    """``h(Pe) + Pe log(|X| - 1)``."""
    extra = pe * math.log2(support_size - 1) if support_size > 1 else 0.0
    return binary_entropy(pe) + extra


@dataclass(frozen=True)
class MultipartiteState:
    """A state on a tensor product of labelled factors, some flagged classical."""

    state: np.ndarray
    factor_dims: tuple
    labels: tuple
    classical_flags: tuple

    def __init__(self, state, factor_dims, labels=None, classical_flags=None, tol: float = HERM_TOL):
        rho = check_state(state, max(tol, 1e-8))
        dims = tuple(int(d) for d in factor_dims)
        if int(np.prod(dims)) != rho.shape[0]:
            raise DimMismatch(f"factor dims {dims} do not multiply to {rho.shape[0]}")
        labels = tuple(labels) if labels is not None else tuple(f"A{i + 1}" for i in range(len(dims)))
        flags = tuple(bool(f) for f in classical_flags) if classical_flags is not None else (False,) * len(dims)
        if len(labels) != len(dims) or len(flags) != len(dims):
            raise SizeMismatch("one label and one flag per factor")
        if len(set(labels)) != len(labels):
            raise SizeMismatch("factor labels must be distinct")
        object.__setattr__(self, "state", rho)
        object.__setattr__(self, "factor_dims", dims)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "classical_flags", flags)
        for i, flag in enumerate(flags):
            if flag and not _is_classical_factor(rho, dims, i, 1e-9):
                raise FlagMissing(f"factor {labels[i]!r} is flagged classical but has coherences")

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def index(self, factor) -> int:
        if isinstance(factor, (int, np.integer)):
            if not 0 <= factor < self.n_factors:
                raise DimMismatch(f"factor index {factor} out of range")
            return int(factor)
        try:
            return self.labels.index(factor)
        except ValueError:
            raise DimMismatch(f"unknown factor label {factor!r}") from None

    def indices(self, J) -> tuple:
        if J is None:
            return ()
        if isinstance(J, (int, np.integer, str)):
            J = [J]
        return tuple(sorted({self.index(j) for j in J}))

    def reduced(self, J) -> np.ndarray:
        idx = self.indices(J)
        if not idx:
            return np.ones((1, 1), dtype=complex)
        return partial_trace(self.state, self.factor_dims, idx)

    def is_classical(self, J) -> bool:
        return all(self.classical_flags[i] for i in self.indices(J))


def _is_classical_factor(rho: np.ndarray, dims: tuple, i: int, tol: float) -> bool:
    n = len(dims)
    T = rho.reshape(dims + dims)
    T = np.moveaxis(T, [i, n + i], [0, 1])
    d = dims[i]
    for a in range(d):
        for b in range(d):
            if a != b and np.max(np.abs(T[a, b])) > tol:
                return False
    return True


def _disjoint(m: MultipartiteState, *sets) -> list:
    out = [set(m.indices(s)) for s in sets]
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if out[i] & out[j]:
                raise OverlappingSets("factor sets must be disjoint")
    return out


def subsystem_entropy(m: MultipartiteState, J) -> float:
    return von_neumann_entropy(m.reduced(J))


def conditional_entropy(m: MultipartiteState, J, K=None) -> float:
    """``H(J|K) = H(JK) - H(K)``."""
    j, k = _disjoint(m, J, K)
    return subsystem_entropy(m, j | k) - subsystem_entropy(m, k)


def mutual_information(m: MultipartiteState, J, K) -> float:
    j, k = _disjoint(m, J, K)
    return subsystem_entropy(m, j) + subsystem_entropy(m, k) - subsystem_entropy(m, j | k)


def conditional_mutual_information(m: MultipartiteState, J, K, L=None) -> float:
    """``I(J ; K | L) = H(JL) + H(KL) - H(JKL) - H(L)``."""
    j, k, l = _disjoint(m, J, K, L)
    return (
        subsystem_entropy(m, j | l)
        + subsystem_entropy(m, k | l)
        - subsystem_entropy(m, j | k | l)
        - subsystem_entropy(m, l)
    )


@dataclass(frozen=True)
class CqChannel:
    """Map from a finite alphabet to density operators of a common dimension."""

    outputs: tuple
    labels: tuple

    def __init__(self, outputs, labels=None):
        outs = tuple(check_state(W) for W in outputs)
        if not outs:
            raise SizeMismatch("empty alphabet")
        d = outs[0].shape[0]
        if any(W.shape[0] != d for W in outs):
            raise DimMismatch("all outputs must share one dimension")
        labels = tuple(labels) if labels is not None else tuple(range(len(outs)))
        if len(labels) != len(outs):
            raise SizeMismatch("one label per output")
        object.__setattr__(self, "outputs", outs)
        object.__setattr__(self, "labels", labels)

    @property
    def alphabet_size(self) -> int:
        return len(self.outputs)

    @property
    def dim(self) -> int:
        return self.outputs[0].shape[0]

    def __getitem__(self, x) -> np.ndarray:
        return self.outputs[x]

    def average(self, P) -> np.ndarray:
        P = check_distribution(P, self.alphabet_size)
        return sum(p * W for p, W in zip(P, self.outputs))

    def is_commuting(self, tol: float = 1e-9) -> bool:
        outs = self.outputs
        return all(
            np.max(np.abs(A @ B - B @ A)) <= tol for i, A in enumerate(outs) for B in outs[i + 1:]
        )

    def to_json(self) -> dict:
        return {
            "dims": [self.dim],
            "labels": [str(label) for label in self.labels],
            "states": [matrix_to_json(W) for W in self.outputs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CqChannel":
        labels = data.get("labels")
        return cls([matrix_from_json(s) for s in data["states"]], labels)


def check_distribution(P, size: int | None = None) -> np.ndarray:
    P = np.asarray(P, dtype=float).ravel()
    if size is not None and P.shape[0] != size:
        raise SizeMismatch(f"distribution of length {P.shape[0]} for alphabet of size {size}")
    if np.any(P < -1e-12) or abs(P.sum() - 1) > 1e-9:
        raise SizeMismatch("not a probability distribution")
    return np.clip(P, 0, None)


def conditional_output_entropy(P, W: CqChannel) -> float:
    """``H(W|P) = sum_x P(x) H(W_x)``."""
    P = check_distribution(P, W.alphabet_size)
    return float(sum(p * von_neumann_entropy(Wx) for p, Wx in zip(P, W.outputs) if p > 0))


def holevo_information(P, W: CqChannel) -> float:
    """``I(P;W) = H(PW) - H(W|P)``."""
    val = von_neumann_entropy(W.average(P)) - conditional_output_entropy(P, W)
    return max(0.0, val)


def channel_divergence(V: CqChannel, W: CqChannel, P) -> float:
    """``D(V||W|P) = sum_x P(x) D(V_x||W_x)``."""
    P = check_distribution(P, W.alphabet_size)
    total = 0.0
    for p, Vx, Wx in zip(P, V.outputs, W.outputs):
        if p > 0:
            total += p * relative_entropy(Vx, Wx)
    return total


def classical_register(P) -> np.ndarray:
    return np.diag(np.asarray(P, dtype=complex))


def channel_state(P, W: CqChannel, labels=("X", "Y")) -> MultipartiteState:
    """``gamma = sum_x P(x) [x] (x) W_x`` with the input register flagged classical."""
    P = check_distribution(P, W.alphabet_size)
    a = W.alphabet_size
    gamma = np.zeros((a * W.dim, a * W.dim), dtype=complex)
    for x, (p, Wx) in enumerate(zip(P, W.outputs)):
        e = np.zeros((a, a))
        e[x, x] = p
        gamma += np.kron(e, Wx)
    return MultipartiteState(gamma, (a, W.dim), labels, (True, False))


def classical_mutual_information(joint) -> float:
    """Mutual information of a joint probability matrix ``joint[x, y]``."""
    J = np.asarray(joint, dtype=float)
    return shannon_entropy(J.sum(axis=1)) + shannon_entropy(J.sum(axis=0)) - shannon_entropy(J)


def measured_joint(P, W: CqChannel, povm) -> np.ndarray:
    """Joint distribution of input and outcome when ``W`` is read out by ``povm``."""
    P = check_distribution(P, W.alphabet_size)
    return np.array([[p * np.real(np.trace(Wx @ E)) for E in povm.elements] for p, Wx in zip(P, W.outputs)])


def entropy_exchange(rho, ch: KrausChannel) -> float:
    """Entropy of ``(ch (x) id)`` applied to a purification of ``rho``."""
    rho = check_state(rho)
    d = rho.shape[0]
    if ch.dim_in != d:
        raise DimMismatch("channel input dimension differs from the state")
    big = KrausChannel([np.kron(K, np.eye(d)) for K in ch.kraus_ops], check=False)
    return von_neumann_entropy(apply_channel(big, purify(rho)))


def entropy_exchange_environment(rho, ch: KrausChannel) -> float:
    """Same quantity computed as the entropy of the Stinespring environment."""
    return von_neumann_entropy(environment_state(rho, ch))


def coherent_information(rho, ch: KrausChannel) -> float:
    """``I_e = H(ch(rho)) - S_e(rho; ch)``."""
    return von_neumann_entropy(apply_channel(ch, rho)) - entropy_exchange(rho, ch)


def product_state(*states) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for s in states:
        out = np.kron(out, s)
    return out


def subsets(items: Iterable) -> list:
    """All nonempty subsets of ``items`` in a fixed order (by size, then lexicographic)."""
    items = list(items)
    return [frozenset(c) for r in range(1, len(items) + 1) for c in combinations(items, r)]
