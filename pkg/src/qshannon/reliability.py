"""Error exponents of cq channels: greedy (achievability) and sphere-packing (converse) bounds.

All exponents are in bits.  The divergence minimisations reduce to spectra:

* the individual exponent couples each ``V_x`` only to ``W_x``; pinching
  ``V_x`` in the eigenbasis of ``W_x`` lowers the divergence and raises the
  entropy, so diagonal ``V_x`` are optimal and the minimiser is a common
  tilt ``v_x ~ w_x^s``;
* the collective exponent depends on ``rho`` through ``-H(rho) - Tr rho log PW``;
  for fixed spectrum the trace term is extremal when ``rho`` is diagonal in
  the eigenbasis of ``PW`` with aligned ordering, so the problem is classical;
* the sphere-packing exponent is a jointly convex problem solved by
  alternating minimisation of ``D(V||W|P) + s D(V||sigma|P)`` over ``V`` and
  ``sigma``, with ``s`` tuned so that ``I(P;V) = R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from .entropy import (
    INFINITY,
    CqChannel,
    check_distribution,
    conditional_output_entropy,
    holevo_information,
    shannon_entropy,
    von_neumann_entropy,
)
from .errors import NoConvergence
from .linalg import RANK_TOL, eig_hermitian
from .typicality import min_divergence_entropy_at_most

LN2 = math.log(2)
MAX_MULTIPLIER = 1e6


def _spectra(W: CqChannel, P: np.ndarray) -> list:
    return [np.clip(eig_hermitian(W[x]).eigenvalues, 0, None) for x in range(W.alphabet_size) if P[x] > 0]


def _common_tilt(ws: list, s: float) -> list:
    out = []
    for w in ws:
        sup = w > RANK_TOL
        v = np.zeros_like(w)
        logs = s * np.log(w[sup])
        logs -= logs.max()
        e = np.exp(logs)
        v[sup] = e / e.sum()
        out.append(v)
    return out


def _cond_div(vs: list, ws: list, p: np.ndarray) -> float:
    total = 0.0
    for px, v, w in zip(p, vs, ws):
        sup = v > 0
        total += px * float(np.sum(v[sup] * (np.log2(v[sup]) - np.log2(w[sup]))))
    return max(0.0, total)


def _cond_ent(vs: list, p: np.ndarray) -> float:
    return float(sum(px * shannon_entropy(v) for px, v in zip(p, vs)))


def exponent_individual(W: CqChannel, P, L: float) -> float:
    """``inf { D(V||W|P) : H(V|P) > L }``; ``+inf`` when no channel is that noisy."""
    P = check_distribution(P, W.alphabet_size)
    p = P[P > 0]
    ws = _spectra(W, P)
    if L < _cond_ent(ws, p):
        return 0.0
    top = float(sum(px * math.log2(int((w > RANK_TOL).sum())) for px, w in zip(p, ws)))
    if L >= top - 1e-12:
        return INFINITY
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _cond_ent(_common_tilt(ws, mid), p) > L:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return _cond_div(_common_tilt(ws, lo), ws, p)


def exponent_collective(W: CqChannel, P, Lp: float) -> float:
    """``min { D(rho||PW) : H(rho) <= L' }``."""
    P = check_distribution(P, W.alphabet_size)
    q = np.clip(eig_hermitian(W.average(P)).eigenvalues, 0, None)
    return min_divergence_entropy_at_most(q, Lp)


@dataclass(frozen=True)
class GreedyExponent:
    value: float
    L: float
    Lp: float
    individual: float
    collective: float


def greedy_exponent_point(W: CqChannel, P, R: float) -> GreedyExponent:
    """``max_L min{ mu_i(L), mu_c(L + R)/2 }`` with its maximiser.

    ``mu_i`` is nondecreasing and ``mu_c(L + R)`` nonincreasing in ``L``, so
    the maximum sits at their crossing, found by bisection.
    """
    P = check_distribution(P, W.alphabet_size)
    Hc = conditional_output_entropy(P, W)
    Hout = von_neumann_entropy(W.average(P))
    ws = _spectra(W, P)
    p = P[P > 0]
    top = float(sum(px * math.log2(int((w > RANK_TOL).sum())) for px, w in zip(p, ws)))

    def point(L):
        mi = exponent_individual(W, P, L)
        mc = exponent_collective(W, P, L + R)
        return GreedyExponent(float(min(mi, 0.5 * mc)), float(L), float(L + R), float(mi), float(mc))

    if R >= Hout - Hc:
        return point(Hc)
    hi = min(top, Hout - R)
    if exponent_individual(W, P, hi) <= 0.5 * exponent_collective(W, P, hi + R):
        # mu_i stays below the collective term up to the end of the range
        return point(hi)
    lo = Hc
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if exponent_individual(W, P, mid) < 0.5 * exponent_collective(W, P, mid + R):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    a, b = point(lo), point(hi)
    return a if a.value >= b.value else b


def greedy_exponent(W: CqChannel, P, R: float) -> float:
    return greedy_exponent_point(W, P, R).value


@dataclass(frozen=True)
class SpherePackingPoint:
    """Achieved ``(D(V||W|P), I(P;V))`` pair and the auxiliary channel ``V``."""

    value: float
    divergence: float
    information: float
    multiplier: float
    V: CqChannel | None
    upper_estimate: bool


def _log_on_support(M: np.ndarray):
    w, v = eig_hermitian(M)
    sup = w > RANK_TOL
    return v[:, sup], np.log(w[sup])


class _SpherePacking:
    """Alternating minimisation of ``sum_x P(x) [D(V_x||W_x) + s D(V_x||sigma)]`` (natural logs)."""

    def __init__(self, W: CqChannel, P: np.ndarray):
        self.W = W
        self.P = P
        self.letters = [x for x in range(W.alphabet_size) if P[x] > 0]
        self.supp = []
        for x in self.letters:
            B, lw = _log_on_support(W[x])
            self.supp.append((B, (B * lw) @ B.conj().T))

    def channel_for(self, s: float, sigma: np.ndarray) -> list:
        Bs, ls = _log_on_support(sigma)
        log_sigma = (Bs * ls) @ Bs.conj().T
        Vs = []
        for B, logW in self.supp:
            M = B.conj().T @ (logW + s * log_sigma) @ B / (1 + s)
            M = (M + M.conj().T) / 2
            w, v = np.linalg.eigh(M)
            e = np.exp(w - w.max())
            small = (v * e) @ v.conj().T
            V = B @ small @ B.conj().T
            V = V / np.real(np.trace(V))
            Vs.append((V + V.conj().T) / 2)
        return Vs

    def average(self, Vs: list) -> np.ndarray:
        return sum(self.P[x] * V for x, V in zip(self.letters, Vs))

    def _log_map(self, s: float, v: np.ndarray) -> np.ndarray:
        new = self.average(self.channel_for(s, _state_of(v, self.W.dim)))
        w, u = np.linalg.eigh((new + new.conj().T) / 2)
        return _herm_to_vec((u * np.log(np.clip(w, 1e-300, None))) @ u.conj().T)

    def solve(self, s: float, sigma0: np.ndarray, tol: float = 1e-13, max_iter: int = 20000):
        """Fixed point ``sigma = sum_x P(x) V_x(sigma)``.

        Plain alternation contracts only by about ``s/(1+s)`` per step, so
        the fixed point of ``log sigma`` is first sought with a root finder;
        alternation is the fallback.
        """
        w, u = np.linalg.eigh((sigma0 + sigma0.conj().T) / 2)
        v0 = _herm_to_vec((u * np.log(np.clip(w, 1e-300, None))) @ u.conj().T)
        sol = root(lambda v: (1 + s) * (self._log_map(s, v) - v), v0, method="hybr", options={"xtol": 1e-14})
        if np.all(np.isfinite(sol.x)) and np.max(np.abs(self._log_map(s, sol.x) - sol.x)) <= 1e-11:
            sigma = _state_of(sol.x, self.W.dim)
            Vs = self.channel_for(s, sigma)
            return Vs, self.average(Vs)
        sigma = sigma0
        prev = math.inf
        for it in range(max_iter):
            Vs = self.channel_for(s, sigma)
            sigma = self.average(Vs)
            val = self.divergence(Vs) + s * self.information(Vs)
            if abs(prev - val) <= tol * max(1.0, abs(val)):
                return Vs, sigma
            prev = val
        raise NoConvergence(f"alternating minimisation did not settle (s={s})")

    def divergence(self, Vs: list) -> float:
        total = 0.0
        for x, V, (B, logW) in zip(self.letters, Vs, self.supp):
            total += self.P[x] * (-von_neumann_entropy(V) - float(np.real(np.trace(V @ logW))) / LN2)
        return max(0.0, total)

    def information(self, Vs: list) -> float:
        H = von_neumann_entropy(self.average(Vs))
        return max(0.0, H - sum(self.P[x] * von_neumann_entropy(V) for x, V in zip(self.letters, Vs)))

    def full_channel(self, Vs: list) -> CqChannel:
        outs = [np.array(self.W[x]) for x in range(self.W.alphabet_size)]
        for x, V in zip(self.letters, Vs):
            outs[x] = V
        return CqChannel(outs)


def _herm_to_vec(L: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix modulo multiples of the identity."""
    d = L.shape[0]
    iu = np.triu_indices(d, 1)
    diag = np.real(np.diag(L))
    return np.concatenate([diag - diag.mean(), np.real(L[iu]), np.imag(L[iu])])


def _state_of(v: np.ndarray, d: int) -> np.ndarray:
    """``exp(L) / Tr exp(L)`` for the Hermitian ``L`` with coordinates ``v``."""
    iu = np.triu_indices(d, 1)
    k = len(iu[0])
    L = np.diag(v[:d]).astype(complex)
    L[iu] = v[d:d + k] + 1j * v[d + k:]
    L = L + np.triu(L, 1).conj().T
    w, u = np.linalg.eigh(L)
    e = np.exp(w - w.max())
    S = (u * e) @ u.conj().T
    return S / np.real(np.trace(S))


def zero_rate_sphere_packing(W: CqChannel, P) -> float:
    """``E_sp(0, P) = -log Tr exp(sum_x P(x) log W_x)`` on the common support (``+inf`` if none)."""
    P = check_distribution(P, W.alphabet_size)
    d = W.dim
    common = np.eye(d, dtype=complex)
    for x in range(W.alphabet_size):
        if P[x] > 0:
            B, _ = _log_on_support(W[x])
            Pr = B @ B.conj().T
            common = _intersect(common, Pr)
            if common.shape[1] == 0:
                return INFINITY
    M = np.zeros((common.shape[1],) * 2, dtype=complex)
    for x in range(W.alphabet_size):
        if P[x] > 0:
            B, lw = _log_on_support(W[x])
            M += P[x] * common.conj().T @ ((B * lw) @ B.conj().T) @ common
    w = np.linalg.eigvalsh((M + M.conj().T) / 2)
    top = w.max()
    return float(-(top + math.log(np.sum(np.exp(w - top)))) / LN2)


def _intersect(A: np.ndarray, Pr: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``range(A) cap range(Pr)`` for a projector ``Pr``."""
    if A.shape[1] == 0:
        return A
    M = A.conj().T @ Pr @ A
    w, v = np.linalg.eigh((M + M.conj().T) / 2)
    return A @ v[:, w > 1 - 1e-9]


def _below_resolution(W, P, R, sp, Vs, s, commuting) -> SpherePackingPoint:
    """Rates below ``I(P;V)`` at the largest multiplier.

    The exponent is convex and nonincreasing with slope ``-s`` at
    ``R1 = I(P;V_s)``, so the chord from the zero-rate value lies within
    ``s R1`` of it on ``[0, R1]``.
    """
    R1 = sp.information(Vs)
    E1 = sp.divergence(Vs)
    E0 = zero_rate_sphere_packing(W, P)
    if not math.isfinite(E0):
        raise NoConvergence(f"rate {R:.3g} is below the resolvable range for disjoint supports")
    val = E0 + (E1 - E0) * R / R1
    return SpherePackingPoint(val, val, R, s, None, True)


def sphere_packing_point(W: CqChannel, P, R: float, tol: float = 1e-9) -> SpherePackingPoint:
    """``min { D(V||W|P) : I(P;V) <= R }`` with the minimising auxiliary channel.

    Noncommuting channels are flagged ``upper_estimate``: the value is the one
    attained by the returned ``V``.  Rates so small that the multiplier would
    exceed ``MAX_MULTIPLIER``, or where the fixed point stops converging, get
    a convexity chord, also flagged.
    """
    P = check_distribution(P, W.alphabet_size)
    commuting = W.is_commuting()
    I_W = holevo_information(P, W)
    if R >= I_W - tol:
        return SpherePackingPoint(0.0, 0.0, I_W, 0.0, W, not commuting)
    if R <= 0:
        val = zero_rate_sphere_packing(W, P)
        return SpherePackingPoint(val, val, 0.0, INFINITY, None, not commuting)
    if all(_log_on_support(W[x])[1].size == 1 for x in range(W.alphabet_size) if P[x] > 0):
        # pure outputs: a finite divergence forces V = W, whose information exceeds R
        return SpherePackingPoint(INFINITY, INFINITY, I_W, INFINITY, W, False)
    sp = _SpherePacking(W, P)
    sigma = W.average(P)
    s_hi = 1.0
    Vs, sig = sp.solve(s_hi, sigma)
    while sp.information(Vs) > R:
        if s_hi >= MAX_MULTIPLIER:
            return _below_resolution(W, P, R, sp, Vs, s_hi, commuting)
        try:
            Vn, sn = sp.solve(min(2 * s_hi, MAX_MULTIPLIER), sig)
        except NoConvergence:
            # the optimal sigma is becoming singular; stop at the last solved multiplier
            return _below_resolution(W, P, R, sp, Vs, s_hi, commuting)
        s_hi = min(2 * s_hi, MAX_MULTIPLIER)
        Vs, sig = Vn, sn
    s_lo = 0.0
    best = (Vs, sig, s_hi)
    for _ in range(80):
        mid = 0.5 * (s_lo + s_hi)
        Vm, sm = sp.solve(mid, best[1])
        if sp.information(Vm) > R:
            s_lo = mid
        else:
            s_hi = mid
            best = (Vm, sm, mid)
        if s_hi - s_lo < 1e-11 * max(1.0, s_hi):
            break
    Vs = best[0]
    D = sp.divergence(Vs)
    return SpherePackingPoint(D, D, sp.information(Vs), best[2], sp.full_channel(Vs), not commuting)


def sphere_packing_exponent(W: CqChannel, P, R: float) -> float:
    return sphere_packing_point(W, P, R).value
