"""Block compression of pure-state sources onto typical subspaces."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .entropy import INFINITY, shannon_entropy
from .errors import DimMismatch, EmptyProjector, ScaleError
from .linalg import eig_hermitian, tensor_product
from .objects import (
    Ensemble,
    KrausChannel,
    check_state,
    entanglement_fidelity,
    pure_vector,
)
from .typicality import (
    DENSE_LIMIT,
    K_CONST,
    TypicalProjector,
    compositions,
    jhhh_projector,
    log2_multinomial,
    min_divergence_entropy_at_least,
    mu_and_rank,
    truncation_projector,
    variance_typical_projector,
)


@dataclass(frozen=True)
class CompressionScheme:
    """Encoder ``sigma -> Pi sigma Pi + (1 - Tr sigma Pi)/K 1_K`` onto ``K = Tr Pi`` dimensions, decoded by embedding.

    A degenerate scheme (empty projector) keeps one dimension and decodes
    every block to the first basis sequence.
    """

    projector: TypicalProjector
    code_dim: int
    n: int
    degenerate: bool = False

    @property
    def rate(self) -> float:
        return math.log2(self.code_dim) / self.n if self.code_dim > 0 else 0.0

    def encoder(self) -> KrausChannel:
        """Kraus realisation of the encoder (dense, small ``n`` only)."""
        F = self.projector.factor()
        D, K = F.shape
        if K == 0:
            return KrausChannel([_row(D, j) for j in range(D)])
        ops = [F.conj().T]
        for v in _complement(F).T:
            for k in range(K):
                op = np.zeros((K, D), dtype=complex)
                op[k, :] = v.conj() / math.sqrt(K)
                ops.append(op)
        return KrausChannel(ops)

    def decoder(self) -> KrausChannel:
        F = self.projector.factor()
        if F.shape[1] == 0:
            return KrausChannel([self.projector.vector((0,) * self.n)[:, None]])
        return KrausChannel([F])

    def channel(self) -> KrausChannel:
        """Decoder after encoder, as a map on the block space."""
        return self.decoder().compose(self.encoder())


def _row(D: int, j: int) -> np.ndarray:
    r = np.zeros((1, D), dtype=complex)
    r[0, j] = 1
    return r


def _complement(F: np.ndarray) -> np.ndarray:
    D, K = F.shape
    P = np.eye(D) - F @ F.conj().T
    w, v = np.linalg.eigh((P + P.conj().T) / 2)
    return v[:, w > 0.5]


def _scheme(Pi: TypicalProjector, n: int, strict: bool) -> CompressionScheme:
    K = Pi.trace()
    if K == 0:
        if strict:
            raise EmptyProjector("no typical sequences")
        warnings.warn("typical projector is empty; using a one-dimensional code space", stacklevel=3)
        return CompressionScheme(Pi, 1, n, degenerate=True)
    return CompressionScheme(Pi, K, n)


def schumacher_scheme(rho, n: int, alpha: float, strict: bool = False) -> CompressionScheme:
    """Compression onto the variance-typical projector of ``rho`` with constant ``alpha``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return _scheme(variance_typical_projector(rho, n, alpha), n, strict)


def jhhh_scheme(basis, n: int, R: float, strict: bool = False) -> CompressionScheme:
    """Universal compression onto basis-diagonal types of entropy at most ``R``."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    return _scheme(jhhh_projector(basis, n, R), n, strict)


def truncation_scheme(rho, n: int, rank: int) -> CompressionScheme:
    """Compression onto the ``rank`` most likely eigen-sequences."""
    return _scheme(truncation_projector(rho, n, rank), n, True)


def schumacher_rate_bound(rho, n: int, alpha: float) -> float:
    """``H(rho) + K d alpha / sqrt(n)``."""
    rho = check_state(rho)
    w = np.clip(eig_hermitian(rho).eigenvalues, 0, None)
    return shannon_entropy(w) + K_CONST * rho.shape[0] * alpha / math.sqrt(n)


def schumacher_fidelity_bound(rho, alpha: float) -> float:
    """``1 - 4 N e^{-2 mu^2 alpha^2}`` with the natural exponential of the Hoeffding estimate."""
    mu, N = mu_and_rank(rho)
    if N == 0:
        return 1.0
    return 1 - 4 * N * math.exp(-2 * mu * mu * alpha * alpha)


def jhhh_fidelity_bound(rho, n: int, R: float, basis=None) -> float:
    """``1 - 2 (n+1)^d 2^{-n min_{H(nu) >= R} D(nu||rho)}`` for a source diagonal in ``basis``."""
    r = _diagonal_in(rho, basis)
    m = min_divergence_entropy_at_least(r, R)
    if m == INFINITY:
        return 1.0
    d = len(r)
    return 1 - 2.0 ** (1 + d * math.log2(n + 1) - n * m)


def _diagonal_in(rho, basis) -> np.ndarray:
    rho = check_state(rho)
    if basis is None:
        return np.clip(eig_hermitian(rho).eigenvalues, 0, None)
    B = np.asarray(basis, dtype=complex)
    M = B.conj().T @ rho @ B
    if np.max(np.abs(M - np.diag(np.diag(M)))) > 1e-9:
        raise DimMismatch("source is not diagonal in the given basis")
    return np.clip(np.real(np.diag(M)), 0, None)


def strong_converse_log2_dim_bound(rho, n: int, lam: float, alpha: float | None = None) -> float:
    """log2 of ``(1 - lam - 4 sqrt(N) e^{-mu^2 alpha^2}) 2^{n H - K d alpha sqrt(n)}``.

    Any block code reaching average fidelity ``1 - lam`` uses at least this
    many dimensions.  With ``alpha=None`` the bound is maximised over alpha.
    Returns ``-inf`` when the bound is vacuous.
    """
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    rho = check_state(rho)
    d = rho.shape[0]
    H = shannon_entropy(np.clip(eig_hermitian(rho).eigenvalues, 0, None))
    mu, N = mu_and_rank(rho)

    def value(a: float) -> float:
        lead = 1 - lam - (4 * math.sqrt(N) * math.exp(-mu * mu * a * a) if N else 0.0)
        if lead <= 0:
            return -math.inf
        return math.log2(lead) + n * H - K_CONST * d * a * math.sqrt(n)

    if alpha is not None:
        return value(alpha)
    if N == 0:
        return value(1e-12)
    # below a0 the leading factor is nonpositive
    if 1 - lam <= 0:
        return -math.inf
    a0 = math.sqrt(max(0.0, math.log(4 * math.sqrt(N) / (1 - lam)))) / mu
    res = minimize_scalar(lambda a: -value(a) if math.isfinite(value(a)) else 1e300,
                          bounds=(a0 * (1 + 1e-9) + 1e-12, a0 + 20 / mu), method="bounded",
                          options={"xatol": 1e-10})
    return max(value(res.x), value(a0 + 1 / mu))


def strong_converse_dim_bound(rho, n: int, lam: float, alpha: float | None = None) -> float:
    val = strong_converse_log2_dim_bound(rho, n, lam, alpha)
    if val == -math.inf:
        return 0.0
    return 2.0 ** val


@dataclass(frozen=True)
class Fidelities:
    average_fidelity: float
    average_distortion: float
    entanglement_fidelity: float

    def __iter__(self):
        return iter((self.average_fidelity, self.average_distortion, self.entanglement_fidelity))


def _sequence_terms(m: float, K: int) -> tuple:
    """Fidelity and trace distance between a pure block state and its image, given its typical mass ``m``."""
    m = min(max(m, 0.0), 1.0)
    c = (1 - m) / K
    fid = m * m + c * m
    norm = (K - 1) * c + math.sqrt((c - (1 - m)) ** 2 + 4 * (1 - m) * (c + m))
    return fid, min(1.0, 0.5 * norm)


def scheme_fidelities(scheme: CompressionScheme, ensemble: Ensemble, n: int | None = None,
                      method: str = "auto") -> Fidelities:
    """Average fidelity, average distortion and entanglement fidelity of a scheme on an i.i.d. pure source.

    ``method`` is ``"symbolic"`` (type-class sums), ``"dense"`` (explicit
    block matrices) or ``"auto"``.
    """
    n = scheme.n if n is None else n
    if n != scheme.n:
        raise DimMismatch("scheme block length differs from n")
    if not ensemble.is_pure():
        raise ValueError("ensemble states must be pure")
    Pi = scheme.projector
    if ensemble.dim != Pi.d:
        raise DimMismatch("ensemble dimension differs from the scheme")
    if method == "dense" or (method == "auto" and not _symbolic_ok(Pi, ensemble) and Pi.dim <= 256):
        return _dense_fidelities(scheme, ensemble)
    if method not in ("symbolic", "auto"):
        raise ValueError(f"unknown method {method!r}")
    if not _symbolic_ok(Pi, ensemble):
        raise ScaleError("source is not diagonal in the projector basis and the block is too large")
    return _symbolic_fidelities(scheme, ensemble)


def _symbolic_ok(Pi: TypicalProjector, ensemble: Ensemble) -> bool:
    if Pi.n_groups != 1:
        return False
    B = Pi.bases[0]
    M = B.conj().T @ ensemble.average() @ B
    return bool(np.max(np.abs(M - np.diag(np.diag(M)))) <= 1e-9)


def _symbolic_fidelities(scheme: CompressionScheme, ensemble: Ensemble) -> Fidelities:
    Pi = scheme.projector
    n, K = scheme.n, scheme.code_dim
    B = Pi.bases[0]
    dists = []
    for s in ensemble.states:
        v = pure_vector(s)
        dists.append(np.abs(B.conj().T @ v) ** 2)
    avg = np.clip(np.real(np.diag(B.conj().T @ ensemble.average() @ B)), 0, None)
    if scheme.degenerate:
        return _degenerate_fidelities(ensemble, dists, avg, n)
    fe = Pi.mass_from_distributions([avg] * n) ** 2
    classical = all(np.isclose(p.max(), 1.0, atol=1e-12) for p in dists)
    if classical:
        mass = Pi.mass_from_distributions([avg] * n)
        f1, d1 = _sequence_terms(1.0, K)
        f0, d0 = _sequence_terms(0.0, K)
        return Fidelities(mass * f1 + (1 - mass) * f0, mass * d1 + (1 - mass) * d0, fe)
    F_terms, D_terms = [], []
    for c, w in _composition_weights(ensemble.probs, n):
        if w == 0:
            continue
        seq_dists = [dists[i] for i, ci in enumerate(c) for _ in range(ci)]
        f, dd = _sequence_terms(Pi.mass_from_distributions(seq_dists), K)
        F_terms.append(w * f)
        D_terms.append(w * dd)
    return Fidelities(math.fsum(F_terms), math.fsum(D_terms), fe)


def _composition_weights(P: np.ndarray, n: int):
    r = len(P)
    for c in compositions(n, r):
        if any(ci and P[i] == 0 for i, ci in enumerate(c)):
            continue
        lp = log2_multinomial(c) + sum(ci * math.log2(P[i]) for i, ci in enumerate(c) if ci)
        yield c, 2.0 ** lp


def _degenerate_fidelities(ensemble: Ensemble, dists: list, avg: np.ndarray, n: int) -> Fidelities:
    # every block decodes to the first basis sequence
    F_terms, D_terms = [], []
    for c, w in _composition_weights(ensemble.probs, n):
        f = math.prod(float(dists[i][0]) ** ci for i, ci in enumerate(c))
        F_terms.append(w * f)
        D_terms.append(w * math.sqrt(max(0.0, 1 - f)))
    return Fidelities(math.fsum(F_terms), math.fsum(D_terms), float(avg[0]) ** (2 * n))


def _dense_fidelities(scheme: CompressionScheme, ensemble: Ensemble) -> Fidelities:
    import itertools

    Pi = scheme.projector
    n = scheme.n
    if Pi.dim > DENSE_LIMIT:
        raise ScaleError("block dimension too large for dense evaluation")
    ch = scheme.channel()
    vecs = [pure_vector(s) for s in ensemble.states]
    Fbar, Dbar = 0.0, 0.0
    for idx in itertools.product(range(len(vecs)), repeat=n):
        p = math.prod(ensemble.probs[i] for i in idx)
        if p == 0:
            continue
        v = tensor_product(*[vecs[i] for i in idx])
        psi = np.outer(v, v.conj())
        out = ch(psi)
        Fbar += p * float(np.real(v.conj() @ out @ v))
        Dbar += p * 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(out - psi))))
    rho_n = tensor_product(*([ensemble.average()] * n))
    Fe = entanglement_fidelity(rho_n, ch)
    return Fidelities(float(min(Fbar, 1.0)), float(min(Dbar, 1.0)), float(Fe))
