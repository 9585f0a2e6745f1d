"""Holevo capacity, multiple-access outer bounds and multi-source rate regions."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import (
    CqChannel,
    MultipartiteState,
    check_distribution,
    conditional_entropy,
    conditional_mutual_information,
    holevo_information,
    relative_entropy,
    subsystem_entropy,
    von_neumann_entropy,
)
from .errors import ConfigError, DimMismatch, FlagMissing, NoConvergence, NotPure, SizeMismatch
from .linalg import partial_trace, tensor_product
from .objects import Ensemble, check_state


@dataclass(frozen=True)
class HolevoResult:
    distribution: np.ndarray
    capacity: float
    gap: float
    iterations: int
    converged: bool

    def divergences(self, W: CqChannel) -> np.ndarray:
        return letter_divergences(W, self.distribution)


def letter_divergences(W: CqChannel, P) -> np.ndarray:
    """``D(W_x || PW)`` for every letter."""
    avg = W.average(P)
    return np.array([relative_entropy(W[x], avg) for x in range(W.alphabet_size)])


_NOISE = 1e-13


def optimize_holevo(W: CqChannel, tol: float = 1e-9, max_iter: int = 100_000,
                    strict: bool = False) -> HolevoResult:
    """Maximise ``I(P;W)`` by the multiplicative update ``P'(x) ~ P(x) 2^{D(W_x||PW)}``.

    An update that lowers ``I`` is halved towards the current point until it
    does not.  Stops once ``max_x D(W_x||PW) - I(P;W) <= tol``, which
    certifies ``C - I(P;W) <= tol``.  Without convergence the best iterate is
    returned with ``converged=False``, or NoConvergence raised if ``strict``.
    """
    a = W.alphabet_size
    P = np.full(a, 1.0 / a)
    I = holevo_information(P, W)
    best = None
    for it in range(max_iter + 1):
        Dx = letter_divergences(W, P)
        gap = max(float(Dx.max() - I), 0.0)
        if best is None or gap < best[2]:
            best = (P, I, gap)
        if gap <= tol:
            return HolevoResult(P, I, gap, it, True)
        if it == max_iter:
            break
        logits = np.log(P, where=P > 0, out=np.full(a, -np.inf)) + Dx * math.log(2)
        logits -= logits.max()
        Q = np.exp(logits)
        Q /= Q.sum()
        step = 1.0
        while True:
            cand = (1 - step) * P + step * Q
            Ic = holevo_information(cand, W)
            # decreases at rounding level are accepted: near the optimum the
            # gain per step falls below double precision
            if Ic >= I - _NOISE or step < 1e-12:
                break
            step /= 2
        P, I = cand, Ic
    if strict:
        raise NoConvergence(f"capacity gap {best[2]:.3g} after {it} iterations")
    return HolevoResult(best[0], best[1], best[2], it, False)


@dataclass(frozen=True)
class RatePolytope:
    """Rate region given by linear constraints ``sum_{i in J} R_i (>= or <=) value``.

    ``nonnegative`` adds ``R_i >= 0`` for every coordinate.
    """

    s: int
    constraints: tuple
    nonnegative: bool = True
    names: tuple = field(default=())

    def __post_init__(self):
        for J, sense, val in self.constraints:
            if sense not in (">=", "<="):
                raise ConfigError(f"unknown constraint sense {sense!r}")
            if not J or any(not 0 <= j < self.s for j in J):
                raise SizeMismatch(f"constraint subset {J} invalid for {self.s} rates")
            if not math.isfinite(val):
                raise ConfigError("constraint bounds must be finite")

    def all_constraints(self) -> list:
        out = list(self.constraints)
        if self.nonnegative:
            out += [((i,), ">=", 0.0) for i in range(self.s)]
        return out

    def value(self, J, sense: str | None = None) -> float:
        J = tuple(sorted(J))
        for K, sn, v in self.constraints:
            if K == J and (sense is None or sn == sense):
                return v
        raise KeyError(J)

    def slack(self, R) -> float:
        """Smallest constraint slack at ``R`` (negative means violated)."""
        R = np.asarray(R, dtype=float)
        if R.shape != (self.s,):
            raise SizeMismatch(f"rate tuple of length {R.size} for {self.s} rates")
        worst = math.inf
        for J, sense, val in self.all_constraints():
            tot = float(sum(R[j] for j in J))
            worst = min(worst, tot - val if sense == ">=" else val - tot)
        return worst

    def contains(self, R, tol: float = 1e-9) -> bool:
        return self.slack(R) >= -tol

    def vertices(self, tol: float = 1e-9) -> list:
        """Extreme points by intersecting ``s`` tight constraints (``s <= 3``)."""
        if self.s > 3:
            raise ConfigError("vertex enumeration is limited to s <= 3")
        cons = self.all_constraints()
        found = []
        for combo in itertools.combinations(cons, self.s):
            A = np.zeros((self.s, self.s))
            b = np.zeros(self.s)
            for k, (J, _, val) in enumerate(combo):
                A[k, list(J)] = 1
                b[k] = val
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            R = np.linalg.solve(A, b)
            if self.contains(R, tol) and not any(np.allclose(R, F, atol=1e-9) for F in found):
                found.append(R)
        found.sort(key=lambda r: tuple(np.round(r, 12)))
        return [tuple(float(v) for v in R) for R in found]

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "names": list(self.names),
            "nonnegative": self.nonnegative,
            "constraints": [{"subset": list(J), "sense": sense, "value": round(v, 12)}
                            for J, sense, v in self.constraints],
        }

    def corners_csv(self, corners: Sequence[tuple]) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["corner"] + [f"R{i + 1}" for i in range(self.s)])
        for k, R in enumerate(corners):
            w.writerow([k] + [f"{v:.12g}" for v in R])
        return buf.getvalue()


def _nonempty_subsets(s: int) -> list:
    return [J for r in range(1, s + 1) for J in itertools.combinations(range(s), r)]


class MacChannel:
    """Multiple-access cq channel: ``outputs[(x_1, ..., x_s)]`` is a density operator."""

    def __init__(self, alphabet_sizes: Sequence[int], outputs):
        self.alphabet_sizes = tuple(int(a) for a in alphabet_sizes)
        self.outputs = {}
        for key in itertools.product(*[range(a) for a in self.alphabet_sizes]):
            if key not in outputs:
                raise SizeMismatch(f"missing output for input {key}")
            self.outputs[key] = check_state(outputs[key])
        dims = {W.shape[0] for W in self.outputs.values()}
        if len(dims) != 1:
            raise DimMismatch("outputs of different dimensions")
        self.dim = dims.pop()

    @property
    def senders(self) -> int:
        return len(self.alphabet_sizes)

    def channel_state(self, Ps: Sequence) -> MultipartiteState:
        """``sum_x prod_i P_i(x_i) [x_1] (x) ... (x) [x_s] (x) W_x``."""
        if len(Ps) != self.senders:
            raise SizeMismatch("one input distribution per sender")
        Ps = [check_distribution(P, a) for P, a in zip(Ps, self.alphabet_sizes)]
        D = int(np.prod(self.alphabet_sizes)) * self.dim
        gamma = np.zeros((D, D), dtype=complex)
        for key, W in self.outputs.items():
            p = math.prod(P[x] for P, x in zip(Ps, key))
            if p == 0:
                continue
            regs = [np.diag(np.eye(a)[x]) for a, x in zip(self.alphabet_sizes, key)]
            gamma += p * tensor_product(*regs, W)
        labels = tuple(f"X{i + 1}" for i in range(self.senders)) + ("Y",)
        return MultipartiteState(gamma, self.alphabet_sizes + (self.dim,), labels,
                                 (True,) * self.senders + (False,))


def mac_constraints(W: MacChannel, Ps: Sequence) -> dict:
    """``I(X(J) ; Y | X(J^c))`` for every nonempty ``J``."""
    m = W.channel_state(Ps)
    s = W.senders
    y = s
    out = {}
    for J in _nonempty_subsets(s):
        rest = [i for i in range(s) if i not in J]
        out[J] = max(0.0, conditional_mutual_information(m, list(J), [y], rest))
    return out


def mac_outer_region(W: MacChannel, Ps, weights: Sequence[float] | None = None,
                     receivers: int = 1) -> RatePolytope:
    """Outer bound ``R(J) <= I(X(J) ; Y | X(J^c))`` for a product input distribution.

    ``Ps`` may also be a list of product distributions with time-sharing
    ``weights``; the constraint values are then averaged.  The number of
    time-sharing states is capped at ``s`` for one receiver and at
    ``r (2^s - 1)`` otherwise.
    """
    s = W.senders
    if weights is None:
        lists = [Ps]
        weights = [1.0]
    else:
        lists = list(Ps)
        if len(lists) != len(weights):
            raise SizeMismatch("one weight per input distribution list")
        cap = s if receivers == 1 else receivers * (2 ** s - 1)
        if len(lists) > cap:
            raise SizeMismatch(f"at most {cap} time-sharing states are needed")
    weights = check_distribution(weights)
    total = {J: 0.0 for J in _nonempty_subsets(s)}
    for q, Ps_u in zip(weights, lists):
        for J, v in mac_constraints(W, Ps_u).items():
            total[J] += q * v
    cons = tuple((J, "<=", float(v)) for J, v in total.items())
    return RatePolytope(s, cons, True, tuple(f"R{i + 1}" for i in range(s)))


def source_region_constraints(m: MultipartiteState, sources: Sequence | None = None,
                              side=None) -> RatePolytope:
    """Lower bounds ``sum_{j in J} R_j >= H(X(J) | X(J^c) Y)`` for classical sources with quantum side information.

    ``sources`` are the classical factors (default: every factor flagged
    classical); ``side`` the remaining factors (default: all others).
    """
    if sources is None:
        sources = [i for i, f in enumerate(m.classical_flags) if f]
    src = list(m.indices(sources))
    if not src:
        raise FlagMissing("no classical source factors")
    for i in src:
        if not m.classical_flags[i]:
            raise FlagMissing(f"factor {m.labels[i]!r} is not flagged classical")
    if side is None:
        side = [i for i in range(m.n_factors) if i not in src]
    side = list(m.indices(side))
    s = len(src)
    cons = []
    for J in _nonempty_subsets(s):
        jf = [src[j] for j in J]
        rest = [src[j] for j in range(s) if j not in J] + side
        cons.append((J, ">=", max(0.0, conditional_entropy(m, jf, rest))))
    return RatePolytope(s, tuple(cons), True, tuple(m.labels[i] for i in src))


def corner_points(poly: RatePolytope, pi: Sequence[int]) -> tuple:
    """Corner ``R_{pi(i)} = f(pi(i..s)) - f(pi(i+1..s))`` of a region ``R(J) >= f(J)``.

    For source regions this is ``H(X_{pi(i)} | Y X_{pi(1)} ... X_{pi(i-1)})``.
    Requires a constraint for every nonempty subset.
    """
    s = poly.s
    pi = list(pi)
    if sorted(pi) != list(range(s)):
        raise SizeMismatch("pi must be a permutation of the rate indices")
    sense = poly.constraints[0][1]
    f = {(): 0.0}
    for J in _nonempty_subsets(s):
        f[J] = poly.value(J, sense)
    R = [0.0] * s
    for i in range(s):
        tail = tuple(sorted(pi[i:]))
        tail_next = tuple(sorted(pi[i + 1:]))
        R[pi[i]] = f[tail] - f[tail_next]
    return tuple(float(v) for v in R)


def all_corner_points(poly: RatePolytope) -> list:
    return [corner_points(poly, pi) for pi in itertools.permutations(range(poly.s))]


def multi_source_bounds(m: MultipartiteState) -> RatePolytope:
    """Lower bounds for quantum encoding of a double source under average fidelity.

    ``R_1 + R_2 >= H(A_1 A_2)``, ``R_1 >= H(A_1|A_2)``, ``R_2 >= H(A_2|A_1)``
    for the average state; with more factors the entanglement-fidelity
    bounds of :func:`coherent_info_bounds` are returned.
    """
    if m.n_factors != 2:
        return coherent_info_bounds(m)
    H = subsystem_entropy(m, [0, 1])
    cons = (
        ((0, 1), ">=", max(0.0, H)),
        ((0,), ">=", max(0.0, conditional_entropy(m, [0], [1]))),
        ((1,), ">=", max(0.0, conditional_entropy(m, [1], [0]))),
    )
    return RatePolytope(2, cons, True, m.labels)


def coherent_info_bounds(m: MultipartiteState, realizations: Sequence[Ensemble] = ()) -> RatePolytope:
    """Entanglement-fidelity lower bounds ``sum_{i in I} R_i >= H(A(I) | A(I^c))``.

    The entanglement-fidelity region depends on the average state only, so
    any pure-state ensemble ``realizations`` with that average state may be
    supplied.  When the members of such an ensemble share their marginal on
    all factors but ``i``, the ensemble could be sent by dense coding
    through ``R_i`` qubits, which forces ``2 R_i >= chi`` of the ensemble.
    """
    s = m.n_factors
    cons = {}
    for J in _nonempty_subsets(s):
        rest = [i for i in range(s) if i not in J]
        cons[J] = max(0.0, conditional_entropy(m, list(J), rest))
    for ens in realizations:
        if not np.allclose(ens.average(), m.state, atol=1e-9):
            raise DimMismatch("realization has a different average state")
        if not ens.is_pure():
            raise NotPure("realizations must consist of pure states")
        chi = von_neumann_entropy(ens.average())
        for i in range(s):
            others = [k for k in range(s) if k != i]
            margs = [partial_trace(st, m.factor_dims, others) for st in ens.states]
            if all(np.allclose(M, margs[0], atol=1e-9) for M in margs):
                cons[(i,)] = max(cons[(i,)], 0.5 * chi)
    return RatePolytope(s, tuple((J, ">=", float(v)) for J, v in cons.items()), True, m.labels)


def ensemble_state(ens: Ensemble, factor_dims: Sequence[int], labels=None) -> MultipartiteState:
    return MultipartiteState(ens.average(), factor_dims, labels)


def weak_subadditivity_gap(rho, dims: tuple, ch1, ch2) -> float:
    """``I_e(rho_1; ch1) + H(rho_2) - I_e(rho; ch1 (x) ch2)``, which is nonnegative."""
    from .entropy import coherent_information

    rho = check_state(rho)
    r1 = partial_trace(rho, dims, [0])
    r2 = partial_trace(rho, dims, [1])
    return coherent_information(r1, ch1) + von_neumann_entropy(r2) - coherent_information(rho, ch1.tensor(ch2))
