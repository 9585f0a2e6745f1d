"""States, channels, measurements, ensembles and the basic distance lemmas."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadShape,
    DimMismatch,
    LambdaViolated,
    NotPure,
    NotState,
    OperatorOutOfRange,
    SizeMismatch,
)
from .linalg import (
    HERM_TOL,
    as_square,
    check_hermitian,
    eig_hermitian,
    eigvals_hermitian,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    sqrt_psd,
    trace_norm,
)

KRAUS_TOL = 1e-8


def check_state(rho, tol: float = HERM_TOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace) and return it."""
    rho = check_hermitian(rho, tol)
    w = eigvals_hermitian(rho)
    if w[-1] < -tol:
        raise NotState(f"minimum eigenvalue {w[-1]:.3g}")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise NotState(f"trace {tr!r} differs from 1")
    return rho


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def is_pure(rho, tol: float = 1e-8) -> bool:
    w = eigvals_hermitian(rho)
    return bool(abs(w[0] - 1) <= tol)


def pure_vector(rho) -> np.ndarray:
    """Unit vector of a rank-one state (global phase fixed by the eigensolver)."""
    w, v = eig_hermitian(rho)
    if abs(w[0] - 1) > 1e-8:
        raise NotPure(f"largest eigenvalue {w[0]:.3g} is not 1")
    return v[:, 0]


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving completely positive map given by Kraus operators."""

    kraus_ops: tuple
    dim_in: int
    dim_out: int

    def __init__(self, kraus_ops, check: bool = True):
        ops = tuple(np.atleast_2d(np.asarray(K, dtype=complex)) for K in kraus_ops)
        if not ops:
            raise BadShape("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(K.shape != shape for K in ops):
            raise BadShape("Kraus operators must share one shape")
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dim_out", shape[0])
        object.__setattr__(self, "dim_in", shape[1])
        if check:
            S = sum(K.conj().T @ K for K in ops)
            dev = np.max(np.abs(S - np.eye(self.dim_in)))
            if dev > KRAUS_TOL:
                raise BadShape(f"Kraus family is not trace preserving (deviation {dev:.3g})")

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(self, rho)

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        return KrausChannel([np.kron(A, B) for A in self.kraus_ops for B in other.kraus_ops], check=False)

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """The map ``self o first``."""
        if first.dim_out != self.dim_in:
            raise DimMismatch("channel dimensions do not chain")
        return KrausChannel([A @ B for A in self.kraus_ops for B in first.kraus_ops], check=False)

    def to_json(self) -> dict:
        return {"kraus": [matrix_to_json(K) for K in self.kraus_ops]}

    @classmethod
    def from_json(cls, data: dict) -> "KrausChannel":
        return cls([matrix_from_json(K) for K in data["kraus"]])


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([np.eye(dim)])


def unitary_channel(U) -> KrausChannel:
    return KrausChannel([U])


def depolarizing_channel(dim: int) -> KrausChannel:
    """Completely depolarizing map built from all matrix units scaled by 1/sqrt(d)."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            E = np.zeros((dim, dim), dtype=complex)
            E[i, j] = 1 / np.sqrt(dim)
            ops.append(E)
    return KrausChannel(ops)


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    rho = as_square(rho)
    if rho.shape[0] != ch.dim_in:
        raise DimMismatch(f"channel input dim {ch.dim_in}, state dim {rho.shape[0]}")
    out = sum(K @ rho @ K.conj().T for K in ch.kraus_ops)
    return (out + out.conj().T) / 2


@dataclass(frozen=True)
class Povm:
    """Positive operators summing to the identity (or to at most it, if ``sub``)."""

    elements: tuple
    sub: bool = False

    def __init__(self, elements, sub: bool = False, tol: float = KRAUS_TOL):
        els = tuple(check_hermitian(E, tol) for E in elements)
        if not els:
            raise BadShape("empty measurement")
        dim = els[0].shape[0]
        if any(E.shape[0] != dim for E in els):
            raise DimMismatch("measurement elements differ in dimension")
        for E in els:
            if eigvals_hermitian(E)[-1] < -tol:
                raise OperatorOutOfRange("measurement element is not positive")
        S = sum(els)
        if sub:
            if eigvals_hermitian(np.eye(dim) - S)[-1] < -tol:
                raise OperatorOutOfRange("elements sum to more than the identity")
        elif np.max(np.abs(S - np.eye(dim))) > tol:
            raise OperatorOutOfRange("elements do not sum to the identity")
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "sub", sub)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def completed(self) -> "Povm":
        """Append the remainder ``1 - sum`` as a final element."""
        rest = np.eye(self.dim) - sum(self.elements)
        return Povm(list(self.elements) + [rest])

    def probabilities(self, rho) -> np.ndarray:
        rho = as_square(rho)
        return np.array([np.real(np.trace(rho @ E)) for E in self.elements])


@dataclass(frozen=True)
class Ensemble:
    """Finite family of states with a probability distribution."""

    states: tuple
    probs: np.ndarray
    dims: tuple = field(default=())

    def __init__(self, states, probs, dims=None):
        sts = tuple(check_state(s) for s in states)
        p = np.asarray(probs, dtype=float)
        if len(sts) != len(p) or not sts:
            raise SizeMismatch("need one probability per state")
        if np.any(p < -1e-12) or abs(p.sum() - 1) > HERM_TOL:
            raise SizeMismatch("probabilities must be nonnegative and sum to one")
        dim = sts[0].shape[0]
        if any(s.shape[0] != dim for s in sts):
            raise DimMismatch("states differ in dimension")
        dims = tuple(dims) if dims is not None else (dim,)
        if int(np.prod(dims)) != dim:
            raise DimMismatch("dims do not multiply to the state dimension")
        object.__setattr__(self, "states", sts)
        object.__setattr__(self, "probs", np.clip(p, 0, None))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> np.ndarray:
        return sum(p * s for p, s in zip(self.probs, self.states))

    def is_pure(self) -> bool:
        return all(is_pure(s) for s in self.states)

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "probs": [float(p) for p in self.probs],
            "states": [matrix_to_json(s) for s in self.states],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Ensemble":
        return cls([matrix_from_json(s) for s in data["states"]], data["probs"], data.get("dims"))


def fidelity_pure(rho, sigma) -> float:
    """Tr(rho sigma) for a pure ``rho``."""
    rho = as_square(rho)
    sigma = as_square(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatch("states differ in dimension")
    if not is_pure(rho):
        raise NotPure("first argument must be a pure state")
    return float(np.clip(np.real(np.trace(rho @ sigma)), 0.0, 1.0))


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of the difference."""
    rho = as_square(rho)
    sigma = as_square(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatch("states differ in dimension")
    return min(1.0, 0.5 * trace_norm(rho - sigma))


def tender_residual(rho, X, lam: float | None = None) -> float:
    """Trace-norm disturbance ``||rho - sqrt(X) rho sqrt(X)||_1`` of a likely effect.

    If ``lam`` is given it must satisfy ``1 - Tr(rho X) <= lam <= 1``; the
    residual is then at most ``sqrt(8 lam)``.
    """
    rho = as_square(rho)
    X = check_hermitian(X)
    w = eigvals_hermitian(X)
    if w[-1] < -HERM_TOL or w[0] > 1 + HERM_TOL:
        raise OperatorOutOfRange("operator must satisfy 0 <= X <= 1")
    if lam is not None:
        miss = 1 - np.real(np.trace(rho @ X))
        if lam > 1 + HERM_TOL or miss > lam + HERM_TOL:
            raise LambdaViolated(f"1 - Tr(rho X) = {miss:.6g} exceeds lambda = {lam:.6g}")
    r = sqrt_psd(X)
    return trace_norm(rho - r @ rho @ r)


def povm_interior(povm: Povm) -> KrausChannel:
    """The map ``rho -> sum_b sqrt(D_b) rho sqrt(D_b)``."""
    return KrausChannel([sqrt_psd(E) for E in povm.elements])


def povm_total(povm: Povm) -> KrausChannel:
    """The map ``rho -> sum_b [b] (x) sqrt(D_b) rho sqrt(D_b)``, register first."""
    m = len(povm)
    ops = []
    for b, E in enumerate(povm.elements):
        ops.append(np.kron(ket(b, m).reshape(m, 1), sqrt_psd(E)))
    return KrausChannel(ops)


def purify(rho) -> np.ndarray:
    """Canonical purification on ``H (x) H`` whose vector is ``vec(sqrt(rho))``.

    In an eigenbasis this is ``sum_j sqrt(q_j) |phi_j> (x) conj|phi_j>``; it
    depends only on ``rho``, not on the eigenvector choice.
    """
    return projector(purification_vector(rho))


def purification_vector(rho) -> np.ndarray:
    rho = check_state(rho)
    return sqrt_psd(rho).reshape(-1)


def entanglement_fidelity(rho, ch: KrausChannel, reference_unitary=None) -> float:
    """Overlap of a purification of ``rho`` with its image under ``ch (x) id``.

    ``reference_unitary`` rotates the reference system of the canonical
    purification, giving another purification of the same state.
    """
    rho = check_state(rho)
    d = rho.shape[0]
    if ch.dim_in != d or ch.dim_out != d:
        raise DimMismatch("channel must act on the state's space")
    psi = purification_vector(rho)
    if reference_unitary is not None:
        psi = np.kron(np.eye(d), np.asarray(reference_unitary)) @ psi
    M = psi.reshape(d, d)
    total = 0.0
    for K in ch.kraus_ops:
        amp = np.vdot(psi, (K @ M).reshape(-1))
        total += abs(amp) ** 2
    return float(np.clip(total, 0.0, 1.0))


def stinespring_isometry(ch: KrausChannel) -> np.ndarray:
    """Isometry ``V = sum_k K_k (x) |k>`` from input to output (x) environment."""
    r = len(ch.kraus_ops)
    V = np.zeros((ch.dim_out * r, ch.dim_in), dtype=complex)
    for k, K in enumerate(ch.kraus_ops):
        V += np.kron(K, ket(k, r).reshape(r, 1))
    return V


def environment_state(rho, ch: KrausChannel) -> np.ndarray:
    """State left in the environment of the Stinespring dilation."""
    V = stinespring_isometry(ch)
    big = V @ as_square(rho) @ V.conj().T
    return partial_trace(big, [ch.dim_out, len(ch.kraus_ops)], [1])


def _rng(seed):
    return np.random.default_rng(seed)


def random_pure(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return projector(v)


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Reduced state of a Gaussian random vector on ``dim x rank``; rank is exact."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadShape(f"rank {rank} outside 1..{dim}")
    rng = _rng(seed)
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_unitary(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_channel(dim_in: int, dim_out: int | None = None, kraus_count: int = 2, seed=None) -> KrausChannel:
    """Kraus blocks of a QR-orthonormalised Gaussian isometry."""
    dim_out = dim_in if dim_out is None else dim_out
    if kraus_count < 1 or dim_out * kraus_count < dim_in:
        raise BadShape("need dim_out * kraus_count >= dim_in")
    rng = _rng(seed)
    rows = dim_out * kraus_count
    Z = rng.normal(size=(rows, dim_in)) + 1j * rng.normal(size=(rows, dim_in))
    Q, _ = np.linalg.qr(Z)
    return KrausChannel([Q[k * dim_out:(k + 1) * dim_out, :] for k in range(kraus_count)])


def random_povm(dim: int, outcomes: int, seed=None) -> Povm:
    if outcomes < 1:
        raise BadShape("need at least one outcome")
    rng = _rng(seed)
    Gs = []
    for _ in range(outcomes):
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        Gs.append(A @ A.conj().T)
    S = sum(Gs)
    w, v = np.linalg.eigh(S)
    Sm = (v / np.sqrt(w)) @ v.conj().T
    return Povm([Sm @ G @ Sm for G in Gs])


def random_projective_povm(dim: int, seed=None, blocks: int | None = None) -> Povm:
    """Rank-one (or block) projective measurement in a random basis."""
    U = random_unitary(dim, seed)
    blocks = dim if blocks is None else blocks
    parts = np.array_split(np.arange(dim), blocks)
    return Povm([U[:, p] @ U[:, p].conj().T for p in parts if len(p)])


def save_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_json(), fh, indent=1)


def load_channel(path) -> KrausChannel:
    with open(path) as fh:
        return KrausChannel.from_json(json.load(fh))


def load_ensemble(path) -> Ensemble:
    with open(path) as fh:
        return Ensemble.from_json(json.load(fh))


def diagonal_state(probs: Sequence[float]) -> np.ndarray:
    return np.diag(np.asarray(probs, dtype=complex))

