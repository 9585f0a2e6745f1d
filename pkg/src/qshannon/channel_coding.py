"""Classical-quantum block codes: greedy maximal codes, error evaluation, converses, code partitions.

Decoder elements are stored as low-rank factors ``D_m = F_m F_m^dagger`` on the
``d^n``-dimensional output space, so a block of ten qubits costs a few
thousand columns rather than dense ``1024 x 1024`` matrices per message.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import (
    CqChannel,
    check_distribution,
    classical_divergence,
    classical_mutual_information,
    conditional_output_entropy,
    holevo_information,
    shannon_entropy,
    von_neumann_entropy,
)
from .errors import DimMismatch, InfeasibleScale, InvariantViolation, OperatorOutOfRange
from .linalg import HERM_TOL, check_hermitian, eigvals_hermitian, orthonormal_range, tensor_product
from .typicality import (
    DENSE_LIMIT,
    K_CONST,
    TypeVector,
    conditional_variance_typical_projector,
    entropy_typical_projector,
    type_class,
    variance_typical_projector,
    variance_typical_set,
)

SUBPOVM_TOL = 1e-8


class BlockCqChannel:
    """A (possibly nonstationary) memoryless cq channel over ``n`` positions."""

    def __init__(self, per_position: Sequence[CqChannel]):
        per_position = tuple(per_position)
        if not per_position:
            raise DimMismatch("a block channel needs at least one position")
        d = per_position[0].dim
        if any(W.dim != d for W in per_position):
            raise DimMismatch("all positions must share one output dimension")
        self.per_position = per_position

    @classmethod
    def stationary(cls, W: CqChannel, n: int) -> "BlockCqChannel":
        return cls([W] * n)

    @property
    def n(self) -> int:
        return len(self.per_position)

    @property
    def d(self) -> int:
        return self.per_position[0].dim

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def is_stationary(self) -> bool:
        return all(W is self.per_position[0] for W in self.per_position)

    def alphabet_sizes(self) -> tuple:
        return tuple(W.alphabet_size for W in self.per_position)

    def output_factors(self, xn: Sequence[int]) -> list:
        if len(xn) != self.n:
            raise DimMismatch(f"input sequence of length {len(xn)} for a block of {self.n}")
        return [W[x] for W, x in zip(self.per_position, xn)]

    def output(self, xn: Sequence[int]) -> np.ndarray:
        """Dense ``W_{x_1} (x) ... (x) W_{x_n}``."""
        if self.dim > DENSE_LIMIT:
            raise InfeasibleScale(f"output dimension {self.dim} exceeds {DENSE_LIMIT}")
        return tensor_product(*self.output_factors(xn))

    def guard(self) -> None:
        if self.dim > DENSE_LIMIT:
            raise InfeasibleScale(f"output dimension {self.dim} exceeds {DENSE_LIMIT}")


def apply_product(mats: Sequence[np.ndarray], X: np.ndarray) -> np.ndarray:
    """``(A_1 (x) ... (x) A_n) X`` for a ``D x k`` matrix ``X``, without forming the product."""
    d = mats[0].shape[0]
    n = len(mats)
    k = X.shape[1]
    T = X.reshape((d,) * n + (k,))
    for i, A in enumerate(mats):
        T = np.moveaxis(np.tensordot(A, T, axes=([1], [i])), 0, i)
    return T.reshape(d ** n, k)


def _expect(mats, F: np.ndarray) -> float:
    """``Tr(rho F F^dagger)`` for a product state given by its factors."""
    if F.shape[1] == 0:
        return 0.0
    return float(np.real(np.vdot(F, apply_product(mats, F))))


@dataclass(frozen=True)
class BlockCode:
    """Codebook of input sequences with a sub-POVM decoder ``D_m = F_m F_m^dagger``.

    The completion ``1 - sum_m D_m`` is the decoder's "no decision" outcome.
    """

    codebook: tuple
    factors: tuple
    n: int
    d: int
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.codebook) != len(self.factors):
            raise DimMismatch("one decoder element per codeword")
        if any(len(x) != self.n for x in self.codebook):
            raise DimMismatch("codewords must have length n")
        D = self.d ** self.n
        if any(F.shape[0] != D for F in self.factors):
            raise DimMismatch("decoder factors must act on the block space")

    @property
    def size(self) -> int:
        return len(self.codebook)

    @property
    def dim(self) -> int:
        return self.d ** self.n

    @property
    def rate(self) -> float:
        return math.log2(self.size) / self.n if self.size else -math.inf

    def decoder_element(self, m: int) -> np.ndarray:
        F = self.factors[m]
        return F @ F.conj().T

    def decoder_sum_norm(self) -> float:
        """Largest eigenvalue of ``sum_m D_m``."""
        if not self.factors:
            return 0.0
        G = np.hstack(self.factors)
        if G.shape[1] == 0:
            return 0.0
        s = np.linalg.svd(G, compute_uv=False)
        return float(s[0] ** 2)

    def is_valid(self, tol: float = SUBPOVM_TOL) -> bool:
        return self.decoder_sum_norm() <= 1 + tol

    def completion(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise InfeasibleScale(f"dimension {self.dim} exceeds {DENSE_LIMIT}")
        C = np.eye(self.dim, dtype=complex)
        for F in self.factors:
            C -= F @ F.conj().T
        return C

    def decoder_traces(self) -> list:
        return [float(np.real(np.vdot(F, F))) for F in self.factors]

    def types(self, alphabet_size: int) -> list:
        return [TypeVector.of(x, alphabet_size) for x in self.codebook]

    def subcode(self, keep: Sequence[int]) -> "BlockCode":
        keep = list(keep)
        return BlockCode(tuple(self.codebook[i] for i in keep), tuple(self.factors[i] for i in keep),
                         self.n, self.d, dict(self.info))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "rate": self.rate if self.size else None,
            "codebook": [list(map(int, x)) for x in self.codebook],
            "decoder_ranks": [int(F.shape[1]) for F in self.factors],
            "decoder_traces": [round(t, 12) for t in self.decoder_traces()],
        }


def _check_dims(code: BlockCode, ch: BlockCqChannel) -> None:
    if code.n != ch.n or code.d != ch.d:
        raise DimMismatch("code and channel block structure differ")


def success_probabilities(code: BlockCode, ch: BlockCqChannel) -> np.ndarray:
    """``Tr(W_{f(m)} D_m)`` per message."""
    _check_dims(code, ch)
    return np.array([_expect(ch.output_factors(x), F) for x, F in zip(code.codebook, code.factors)])


def error_probability(code: BlockCode, ch: BlockCqChannel, mode: str = "max") -> float:
    """Maximum or average (uniform over messages) error probability."""
    if mode not in ("max", "avg"):
        raise ValueError(f"mode must be 'max' or 'avg', not {mode!r}")
    if code.size == 0:
        return 0.0
    err = np.clip(1 - success_probabilities(code, ch), 0.0, 1.0)
    return float(err.max() if mode == "max" else err.mean())


def all_sequences(sizes: Sequence[int]) -> list:
    return list(itertools.product(*[range(a) for a in sizes]))


def sequence_probability(xn: Sequence[int], P_list: Sequence[np.ndarray]) -> float:
    return math.prod(float(P[x]) for P, x in zip(P_list, xn))


def _per_position(P, ch: BlockCqChannel) -> list:
    if isinstance(P, (list, tuple)) and len(P) == ch.n and np.ndim(P[0]) == 1:
        return [check_distribution(p, W.alphabet_size) for p, W in zip(P, ch.per_position)]
    p = check_distribution(P, ch.per_position[0].alphabet_size)
    return [p] * ch.n


class _ShadowState:
    """Running ``B = sum_m D_m`` kept as ``Qb Bs Qb^dagger`` with orthonormal ``Qb``."""

    def __init__(self, D: int, projector: bool):
        self.Q = np.zeros((D, 0), dtype=complex)
        self.Bs = np.zeros((0, 0), dtype=complex)
        self.projector = projector
        self._root = np.zeros((0, 0), dtype=complex)

    def weight(self, mats) -> float:
        if self.Q.shape[1] == 0:
            return 0.0
        RQ = apply_product(mats, self.Q)
        return float(np.real(np.sum((self.Q.conj().T @ RQ) * self.Bs.T)))

    def squeeze(self, U: np.ndarray) -> np.ndarray:
        """``sqrt(1 - B) U``; for a projector ``B`` this is ``(1 - B) U``."""
        if self.Q.shape[1] == 0:
            return U.copy()
        C = self.Q.conj().T @ U
        return U - self.Q @ C + self.Q @ (self._root @ C)

    def add(self, F: np.ndarray) -> None:
        if F.shape[1] == 0:
            return
        C = self.Q.conj().T @ F
        resid = F - self.Q @ C
        extra = orthonormal_range(resid, tol=1e-12)
        Q = np.hstack([self.Q, extra])
        k0, k = self.Q.shape[1], Q.shape[1]
        Bs = np.zeros((k, k), dtype=complex)
        Bs[:k0, :k0] = self.Bs
        G = Q.conj().T @ F
        Bs += G @ G.conj().T
        self.Q, self.Bs = Q, (Bs + Bs.conj().T) / 2
        if self.projector:
            self._root = np.zeros((k, k), dtype=complex)
        else:
            w, v = np.linalg.eigh(self.Bs)
            self._root = (v * np.sqrt(np.clip(1 - w, 0, None))) @ v.conj().T


def _greedy(ch: BlockCqChannel, candidates, decoder_projector, lam: float, eta: float,
            variant: str) -> tuple:
    if variant not in ("sqrt", "projector"):
        raise ValueError("variant must be 'sqrt' or 'projector'")
    ch.guard()
    state = _ShadowState(ch.dim, variant == "projector")
    codebook, factors, rejected_shadow, rejected_error, errors = [], [], [], [], []
    for x in sorted(candidates):
        mats = ch.output_factors(x)
        if state.weight(mats) >= eta:
            rejected_shadow.append(x)
            continue
        U = decoder_projector(x)
        F = state.squeeze(U)
        if variant == "projector":
            F = orthonormal_range(F, tol=1e-10)
        err = 1 - _expect(mats, F)
        if err <= lam:
            codebook.append(tuple(x))
            factors.append(F)
            errors.append(err)
            state.add(F)
        else:
            rejected_error.append(x)
    return codebook, factors, rejected_shadow, rejected_error


def _verify(code: BlockCode, ch: BlockCqChannel, lam: float) -> float:
    if not code.is_valid():
        raise InvariantViolation("decoder elements sum above the identity")
    err = error_probability(code, ch, "max")
    if err > lam + 1e-9:
        raise InvariantViolation(f"constructed code has error {err:.6g} above {lam}")
    return err


def greedy_parameters(lam: float, tau: float, d: int) -> tuple:
    """``(delta, eta)`` with ``delta = max{sqrt(2/lam), sqrt(2/tau) log d}`` and ``eta = min{1-lam, lam^2/32}``."""
    delta = max(math.sqrt(2 / lam), math.sqrt(2 / tau) * math.log2(d))
    eta = min(1 - lam, lam * lam / 32)
    return delta, eta


def greedy_maximal_code(ch: BlockCqChannel, P, candidates=None, lam: float = 0.1,
                        variant: str = "sqrt", delta: float | None = None,
                        eta: float | None = None) -> BlockCode:
    """Maximal code by greedy extension with decoders ``sqrt(1-B) Pi sqrt(1-B)``.

    ``Pi`` is the entropy-typical projector of the candidate's output state.
    Candidates are scanned in lexicographic order; those whose output entropy
    is atypical are dropped first.  The returned code's validity and maximal
    error are checked by direct evaluation.  ``delta`` and ``eta`` default to
    :func:`greedy_parameters`.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    ch.guard()
    P_list = _per_position(P, ch)
    if candidates is None:
        candidates = [x for x in all_sequences(ch.alphabet_sizes()) if sequence_probability(x, P_list) > 0]
    candidates = [tuple(int(v) for v in x) for x in candidates]
    tau = math.fsum(sequence_probability(x, P_list) for x in candidates)
    if tau <= 0:
        raise ValueError("candidate set has zero probability")
    d_, e_ = greedy_parameters(lam, min(tau, 1.0), ch.d)
    delta = d_ if delta is None else delta
    eta = e_ if eta is None else eta
    Hcond = sum(conditional_output_entropy(p, W) for p, W in zip(P_list, ch.per_position))
    ent = {}
    restricted = []
    for x in candidates:
        h = sum(von_neumann_entropy(s) for s in ch.output_factors(x))
        if abs(h - Hcond) <= delta * math.sqrt(ch.n) + 1e-12:
            restricted.append(x)
            ent[x] = h

    def projector(x):
        return entropy_typical_projector(ch.output_factors(x), delta).factor()

    codebook, factors, rs, re_ = _greedy(ch, restricted, projector, lam, eta, variant)
    code = BlockCode(tuple(codebook), tuple(factors), ch.n, ch.d, {
        "construction": "greedy", "variant": variant, "lambda": lam, "eta": eta, "delta": delta,
        "tau": tau, "restricted": len(restricted), "candidates": len(candidates),
        "rejected_shadow": rs, "rejected_error": re_,
    })
    code.info["max_error"] = _verify(code, ch, lam)
    return code


def constant_composition_code(W: CqChannel, P: TypeVector, n: int | None = None, lam: float = 0.1,
                              variant: str = "sqrt", delta: float | None = None,
                              eta: float | None = None) -> BlockCode:
    """Greedy code over the type class of ``P`` with conditional variance-typical decoders.

    The default ``delta = sqrt(2 a d / lam)``.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if not isinstance(P, TypeVector):
        raise TypeError("P must be a TypeVector")
    n = P.n if n is None else n
    if n != P.n:
        raise DimMismatch("type does not belong to block length n")
    if P.size != W.alphabet_size:
        raise DimMismatch("type alphabet differs from channel alphabet")
    a, d = W.alphabet_size, W.dim
    delta = math.sqrt(2 * a * d / lam) if delta is None else delta
    eta = min(1 - lam, lam * lam / 32) if eta is None else eta
    ch = BlockCqChannel.stationary(W, n)
    ch.guard()
    candidates = type_class(P)

    def projector(x):
        return conditional_variance_typical_projector(W, x, delta).factor()

    codebook, factors, rs, re_ = _greedy(ch, candidates, projector, lam, eta, variant)
    code = BlockCode(tuple(codebook), tuple(factors), n, d, {
        "construction": "constant-composition", "variant": variant, "lambda": lam, "eta": eta,
        "delta": delta, "type": P.counts, "candidates": len(candidates),
        "rejected_shadow": rs, "rejected_error": re_,
    })
    code.info["max_error"] = _verify(code, ch, lam)
    return code


def cc_decoder_trace_bound(W: CqChannel, P: TypeVector, delta: float) -> float:
    """log2 of ``exp(n H(W|P) + (K d sqrt(a) delta + K a sqrt(2a) log d) sqrt(n))``."""
    a, d, n = W.alphabet_size, W.dim, P.n
    H = conditional_output_entropy(P.distribution(), W)
    return n * H + (K_CONST * d * math.sqrt(a) * delta
                    + K_CONST * a * math.sqrt(2 * a) * math.log2(d)) * math.sqrt(n)


def converse_delta(a: int, d: int, lam: float) -> float:
    return math.sqrt(32 * a * d) / (1 - lam)


def converse_rate_bound(W: CqChannel, P: TypeVector, n: int | None = None, lam: float = 0.1) -> float:
    """Upper bound on ``log2 |M|`` for constant-composition ``(n, lam)``-codes of type ``P``.

    ``n I(P;W) + log2(4/(1-lam)) + K d delta (1 + sqrt(a)) sqrt(n)`` with
    ``delta = sqrt(32 a d)/(1-lam)``, from comparing the traces of the
    projected decoder ``Pi D_m Pi`` against those of the typical projector ``Pi``.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    n = P.n if n is None else n
    if n != P.n:
        raise DimMismatch("type does not belong to block length n")
    a, d = W.alphabet_size, W.dim
    delta = converse_delta(a, d, lam)
    chi = holevo_information(P.distribution(), W)
    return n * chi + math.log2(4 / (1 - lam)) + K_CONST * d * delta * (1 + math.sqrt(a)) * math.sqrt(n)


def code_rate_bound(W: CqChannel, code: BlockCode, lam: float) -> float:
    """Upper bound on ``log2 |M|`` for a code of mixed composition: ``log2 sum_P 2^{bound(P)}`` over its types."""
    types = {t.counts for t in code.types(W.alphabet_size)}
    vals = [converse_rate_bound(W, TypeVector(c), code.n, lam) for c in sorted(types)]
    top = max(vals)
    return top + math.log2(sum(2.0 ** (v - top) for v in vals))


def project_decoder(code: BlockCode, W: CqChannel, P: TypeVector, lam: float) -> BlockCode:
    """The audit code ``D'_m = Pi D_m Pi`` with ``Pi`` variance-typical for ``PW``."""
    delta = converse_delta(W.alphabet_size, W.dim, lam)
    Pi = variance_typical_projector(W.average(P.distribution()), code.n, delta).factor()
    factors = tuple(Pi @ (Pi.conj().T @ F) for F in code.factors)
    return BlockCode(code.codebook, factors, code.n, code.d, {"projected": True, "delta": delta})


def termination_certificate(code: BlockCode, ch: BlockCqChannel, sample: int | None = None,
                            seed: int = 0) -> float:
    """Smallest ``Tr(W_x B)`` over the shadow-rejected candidates (optionally a random sample)."""
    rejected = list(code.info.get("rejected_shadow", []))
    if not rejected:
        return math.inf
    if sample is not None and sample < len(rejected):
        rng = np.random.default_rng(seed)
        rejected = [rejected[i] for i in sorted(rng.choice(len(rejected), sample, replace=False))]
    G = np.hstack(code.factors)
    return min(_expect(ch.output_factors(x), G) for x in rejected)


def induced_classical_channel(code: BlockCode, ch: BlockCqChannel) -> np.ndarray:
    """Row ``m``: distribution of the decoder outcome (messages, then no-decision) given codeword ``m``."""
    M = code.size
    Q = np.zeros((M, M + 1))
    for m, x in enumerate(code.codebook):
        mats = ch.output_factors(x)
        for k, F in enumerate(code.factors):
            Q[m, k] = _expect(mats, F)
        Q[m, M] = max(0.0, 1 - Q[m, :M].sum())
    return Q


@dataclass(frozen=True)
class HolevoConsistency:
    decoded_information: float
    block_holevo: float
    letter_holevo_sum: float

    @property
    def holds(self) -> bool:
        return (self.decoded_information <= self.block_holevo + 1e-8
                and self.block_holevo <= self.letter_holevo_sum + 1e-8)


def holevo_consistency(code: BlockCode, ch: BlockCqChannel) -> HolevoConsistency:
    """Compare the decoded mutual information under uniform messages with the Holevo quantities."""
    ch.guard()
    M = code.size
    if M == 0:
        return HolevoConsistency(0.0, 0.0, 0.0)
    joint = induced_classical_channel(code, ch) / M
    info = classical_mutual_information(joint)
    avg = sum(ch.output(x) for x in code.codebook) / M
    block = von_neumann_entropy(avg) - sum(
        sum(von_neumann_entropy(s) for s in ch.output_factors(x)) for x in code.codebook) / M
    letters = 0.0
    for i, W in enumerate(ch.per_position):
        counts = np.bincount([x[i] for x in code.codebook], minlength=W.alphabet_size)
        letters += holevo_information(counts / M, W)
    return HolevoConsistency(info, block, letters)


@dataclass(frozen=True)
class CodePartition:
    codes: tuple
    alpha: float
    covered_mass: float
    typical_mass: float
    count_bound_log2: float
    stalled: bool

    @property
    def uncovered_mass(self) -> float:
        return max(0.0, 1 - self.covered_mass)

    def index_of(self, xn) -> int:
        """Index of the codebook containing ``xn``, or ``len(codes)`` if uncovered."""
        xn = tuple(xn)
        for i, c in enumerate(self.codes):
            if xn in c.info["members"]:
                return i
        return len(self.codes)


def code_partition(W: CqChannel, P, n: int, lam: float, delta: float, eta: float,
                   variant: str = "sqrt") -> CodePartition:
    """Disjoint ``(n, lam)``-codes covering all but ``eta`` of ``P^n``.

    Codes are built greedily inside the variance-typical set with
    ``alpha = sqrt(2a/eta)``, each one from the still uncovered sequences,
    until the remainder weighs less than ``eta/2``.
    """
    P = check_distribution(P, W.alphabet_size)
    a = W.alphabet_size
    alpha = math.sqrt(2 * a / eta)
    ch = BlockCqChannel.stationary(W, n)
    ch.guard()
    T = variance_typical_set(P, n, alpha)
    remaining = [tuple(int(v) for v in row) for row in T.index_array()]
    prob = {x: sequence_probability(x, [P] * n) for x in remaining}
    typical_mass = math.fsum(prob.values())
    codes, stalled = [], False
    while remaining and math.fsum(prob[x] for x in remaining) >= eta / 2:
        code = greedy_maximal_code(ch, P, remaining, lam, variant=variant)
        if code.size == 0:
            stalled = True
            break
        members = set(code.codebook)
        code.info["members"] = members
        codes.append(code)
        remaining = [x for x in remaining if x not in members]
    covered = math.fsum(prob[x] for c in codes for x in c.codebook)
    bound = n * (shannon_entropy(P) - holevo_information(P, W) + 3 * delta)
    return CodePartition(tuple(codes), alpha, covered, typical_mass, bound, stalled)


class CqSource:
    """Joint source of a classical letter and a quantum state: entries ``(x, state, probability)``."""

    def __init__(self, entries, alphabet_size: int | None = None):
        entries = [(int(x), np.asarray(s, dtype=complex), float(p)) for x, s, p in entries]
        if not entries:
            raise ValueError("empty source")
        if abs(sum(p for *_, p in entries) - 1) > 1e-9 or any(p < 0 for *_, p in entries):
            raise ValueError("entry probabilities must form a distribution")
        self.entries = entries
        self.alphabet_size = alphabet_size or (max(x for x, *_ in entries) + 1)
        self.dim = entries[0][1].shape[0]

    def marginal(self) -> np.ndarray:
        P = np.zeros(self.alphabet_size)
        for x, _, p in self.entries:
            P[x] += p
        return P

    def channel(self) -> CqChannel:
        """``W_x = sum_pi P(x, pi) pi / P(x)``; letters of zero weight get the maximally mixed state."""
        P = self.marginal()
        outs = []
        for x in range(self.alphabet_size):
            if P[x] > 0:
                outs.append(sum(p * s for y, s, p in self.entries if y == x) / P[x])
            else:
                outs.append(np.eye(self.dim, dtype=complex) / self.dim)
        return CqChannel(outs)

    def conditional_entropy(self) -> float:
        """``H(X|Y)`` of the state ``sum P(x, pi) [x] (x) pi``."""
        P = self.marginal()
        W = self.channel()
        return shannon_entropy(P) - holevo_information(P, W)


@dataclass(frozen=True)
class RateSlicingScheme:
    """Compressor ``x^n -> i`` (index of its codebook, or ``m`` if uncovered) and per-book decoders."""

    partition: CodePartition
    source: CqSource
    n: int
    lam_bar: float

    @property
    def message_count(self) -> int:
        return len(self.partition.codes) + 1

    @property
    def rate(self) -> float:
        return math.log2(self.message_count) / self.n

    def compress(self, xn) -> int:
        return self.partition.index_of(xn)

    def rate_bound(self, delta: float) -> float:
        return self.source.conditional_entropy() + 3 * delta

    def average_error(self) -> float:
        """``1 - sum P^n(x^n) Tr(W_{x^n} D_{f(x^n), x^n})``; uncovered sequences always fail."""
        P = self.source.marginal()
        W = self.source.channel()
        ch = BlockCqChannel.stationary(W, self.n)
        good = 0.0
        for code in self.partition.codes:
            ps = success_probabilities(code, ch)
            good += math.fsum(sequence_probability(x, [P] * self.n) * s for x, s in zip(code.codebook, ps))
        return float(min(1.0, max(0.0, 1 - good)))

    def distortion(self) -> float:
        """Average trace distance between ``[x^n] (x) pi^n`` and its reconstruction."""
        entries = self.source.entries
        if len(entries) ** self.n > 2_000_000:
            raise InfeasibleScale("too many joint sequences")
        lookup = {}
        for code in self.partition.codes:
            for x, F in zip(code.codebook, code.factors):
                lookup[x] = F
        sqrt_cache = {}
        total = []
        for combo in itertools.product(range(len(entries)), repeat=self.n):
            xn = tuple(entries[k][0] for k in combo)
            p = math.prod(entries[k][2] for k in combo)
            if p == 0:
                continue
            F = lookup.get(xn)
            if F is None:
                total.append(2.0 * p)
                continue
            if xn not in sqrt_cache:
                U, s, _ = np.linalg.svd(F, full_matrices=False)
                sqrt_cache[xn] = (U * s) @ U.conj().T
            R = sqrt_cache[xn]
            pi = tensor_product(*[entries[k][1] for k in combo])
            kept = R @ pi @ R
            hit = float(np.real(np.trace(kept)))
            diff = np.sum(np.abs(eigvals_hermitian(pi - kept)))
            total.append(p * (diff + 1 - hit))
        return float(math.fsum(total))

    def distortion_bound(self) -> float:
        return math.sqrt(8 * self.lam_bar) + self.lam_bar


def rate_slicing_scheme(source: CqSource, n: int, lam_bar: float, delta: float,
                        variant: str = "sqrt") -> RateSlicingScheme:
    """Encode the classical part using the quantum part as decoder side information.

    Code partition of the channel ``x -> W_x`` with uncovered mass below
    ``lam_bar/2`` and per-code error ``lam_bar/2``.
    """
    if not 0 < lam_bar < 1:
        raise ValueError("lambda must lie in (0, 1)")
    W = source.channel()
    part = code_partition(W, source.marginal(), n, lam_bar / 2, delta, lam_bar / 2, variant)
    return RateSlicingScheme(part, source, n, lam_bar)


def two_outcome_divergence_bound(rho, sigma, S) -> float:
    """``Tr(rho S) log(Tr(rho S)/Tr(sigma S)) + Tr(rho D) log(Tr(rho D)/Tr(sigma D))`` with ``D = 1 - S``."""
    S = check_hermitian(S)
    w = eigvals_hermitian(S)
    if w[-1] < -HERM_TOL or w[0] > 1 + HERM_TOL:
        raise OperatorOutOfRange("S must satisfy 0 <= S <= 1")
    p = float(np.real(np.trace(np.asarray(rho) @ S)))
    q = float(np.real(np.trace(np.asarray(sigma) @ S)))
    p, q = min(max(p, 0.0), 1.0), min(max(q, 0.0), 1.0)
    return classical_divergence([p, 1 - p], [q, 1 - q])
