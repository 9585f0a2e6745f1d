"""Hermitian linear algebra: spectra, spectral calculus, tensors, norms, supports.

Logarithms are base 2 throughout the package.
"""

from __future__ import annotations

from functools import reduce
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import BadShape, DimMismatch, DomainError, NonHermitian, NotPSD

HERM_TOL = 1e-9
RANK_TOL = 1e-9


class Spectrum(NamedTuple):
    """Eigenvalues sorted descending and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise BadShape(f"expected a nonempty square matrix, got shape {M.shape}")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def is_hermitian(M, tol: float = HERM_TOL) -> bool:
    M = as_square(M)
    return bool(np.max(np.abs(M - M.conj().T)) <= tol)


def check_hermitian(M, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``M`` symmetrised, raising NonHermitian if it is not Hermitian."""
    M = as_square(M)
    dev = np.max(np.abs(M - M.conj().T))
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3g}")
    return (M + M.conj().T) / 2


def jacobi_eigh(M, tol: float = 1e-14, max_sweeps: int = 100) -> Spectrum:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot entry, then applies a
    real Givens rotation chosen to annihilate it.
    """
    A = check_hermitian(M).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(A), 1.0)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= tol * scale * 1e-3:
                    continue
                phase = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                J = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
                A[p, q] = A[q, p] = 0.0
    evals = np.real(np.diag(A))
    order = np.argsort(-evals, kind="stable")
    return Spectrum(evals[order], V[:, order])


def eig_hermitian(M, method: str = "lapack") -> Spectrum:
    """Spectral decomposition with eigenvalues in descending order.

    ``method`` is ``"lapack"`` (numpy's ``eigh``) or ``"jacobi"``.
    """
    A = check_hermitian(M)
    if method == "jacobi":
        return jacobi_eigh(A)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh(A)
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def eigvals_hermitian(M) -> np.ndarray:
    return np.linalg.eigvalsh(check_hermitian(M))[::-1]


def spectral_function(M, f: Callable[[np.ndarray], np.ndarray], kernel_tol: float = RANK_TOL) -> np.ndarray:
    """Apply ``f`` eigenvalue-wise.

    Where ``f`` is undefined on a numerically zero eigenvalue the value 0 is
    used (so that ``0 log 0 = 0`` on the kernel); anywhere else it is a
    DomainError.
    """
    w, v = eig_hermitian(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w), dtype=complex)
    bad = ~np.isfinite(fw)
    if np.any(bad & (np.abs(w) > kernel_tol)):
        raise DomainError("function undefined on a nonzero eigenvalue")
    fw = np.where(bad, 0.0, fw)
    out = (v * fw) @ v.conj().T
    if np.all(np.abs(fw.imag) == 0):
        out = (out + out.conj().T) / 2
    return out


def sqrt_psd(M) -> np.ndarray:
    """Square root of a PSD matrix, clipping round-off negatives."""
    w, v = eig_hermitian(M)
    if w[-1] < -HERM_TOL * max(1.0, abs(w[0])):
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3g}")
    r = np.sqrt(np.clip(w, 0, None))
    out = (v * r) @ v.conj().T
    return (out + out.conj().T) / 2


def log2m(M) -> np.ndarray:
    """Base-2 matrix logarithm on the support of a PSD matrix."""
    def f(w):
        return np.where(w > RANK_TOL, np.log2(np.where(w > RANK_TOL, w, 1.0)), np.nan)
    w = eigvals_hermitian(M)
    if w[-1] < -HERM_TOL:
        raise DomainError("logarithm of an operator with a negative eigenvalue")
    return spectral_function(M, f)


def tensor_product(*ops) -> np.ndarray:
    """Kronecker product of the given matrices or vectors, left to right."""
    if len(ops) == 1 and not isinstance(ops[0], np.ndarray) and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def _check_dims(M: np.ndarray, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != M.shape[0]:
        raise DimMismatch(f"factor dims {list(dims)} do not multiply to {M.shape[0]}")


def partial_trace(M, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    M = as_square(M)
    dims = [int(d) for d in factor_dims]
    _check_dims(M, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimMismatch(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    T = M.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise DimMismatch("too many tensor factors")
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    R = np.einsum("".join(row) + "".join(col) + "->" + out, T)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return R.reshape(kd, kd)


def permute_factors(M, factor_dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator so factor ``order[k]`` becomes k-th."""
    M = as_square(M)
    dims = [int(d) for d in factor_dims]
    _check_dims(M, dims)
    n = len(dims)
    T = M.reshape(dims + dims)
    T = T.transpose(list(order) + [n + i for i in order])
    D = M.shape[0]
    return T.reshape(D, D)


def trace_norm(M) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvals_hermitian(M))))


def operator_norm(M) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    return float(np.max(np.abs(eigvals_hermitian(M))))


def is_psd(M, tol: float = HERM_TOL) -> bool:
    if not is_hermitian(M, tol):
        return False
    return bool(eigvals_hermitian(M)[-1] >= -tol)


def check_psd(M, tol: float = HERM_TOL) -> np.ndarray:
    A = check_hermitian(M, tol)
    lo = eigvals_hermitian(A)[-1]
    if lo < -tol:
        raise NotPSD(f"minimum eigenvalue {lo:.3g}")
    return A


def support_projector(M, tol: float = RANK_TOL) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue above ``tol``."""
    w, v = eig_hermitian(M)
    if w[-1] < -HERM_TOL:
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3g}")
    cols = v[:, w > tol]
    return cols @ cols.conj().T


def orthonormal_range(A, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of ``A``."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0 or A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    return u[:, s > tol * max(1.0, s[0] if s.size else 1.0)]


def least_common_support(Ms: Sequence) -> np.ndarray:
    """Projector onto the span of the union of the supports of PSD matrices."""
    Ms = [check_psd(M) for M in Ms]
    if not Ms:
        raise DimMismatch("need at least one operator")
    dim = Ms[0].shape[0]
    if any(M.shape[0] != dim for M in Ms):
        raise DimMismatch("operators of different dimension")
    cols = []
    for M in Ms:
        w, v = eig_hermitian(M)
        cols.append(v[:, w > RANK_TOL])
    Q = orthonormal_range(np.hstack(cols))
    return Q @ Q.conj().T


def matrix_to_json(M) -> list:
    """Encode a complex matrix (or vector) as nested [re, im] pairs, row-major."""
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in M]
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise BadShape("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
