"""Randomised inequality suites.

Each suite draws seeded random instances and records, per inequality, the
smallest slack ``rhs - lhs`` seen.  A negative slack below ``-tol`` is a
violation of a theorem and therefore an implementation bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .entropy import (
    CqChannel,
    MultipartiteState,
    channel_state,
    classical_mutual_information,
    coherent_information,
    conditional_entropy,
    conditional_mutual_information,
    fannes_bound,
    fano_bound,
    holevo_information,
    measured_joint,
    mutual_information,
    pinching,
    relative_entropy,
    subsystem_entropy,
    von_neumann_entropy,
)
from .errors import ConfigError
from .linalg import trace_norm
from .objects import (
    apply_channel,
    entanglement_fidelity,
    fidelity_pure,
    povm_interior,
    projector,
    random_channel,
    random_density,
    random_povm,
    random_projective_povm,
    random_pure,
    tender_residual,
    trace_distance,
)
from .regions import weak_subadditivity_gap

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SuiteRow:
    suite: str
    inequality: str
    trials: int
    min_slack: float

    @property
    def max_violation(self) -> float:
        return max(0.0, -self.min_slack) if self.trials else 0.0


class _Recorder:
    def __init__(self, names):
        self.slack = {k: math.inf for k in names}
        self.count = {k: 0 for k in names}

    def add(self, name: str, slack: float) -> None:
        self.slack[name] = min(self.slack[name], float(slack))
        self.count[name] += 1


def _seed(seed: int, trial: int, k: int) -> list:
    return [seed, trial, k]


def _random_pure_density(d, seed):
    return random_pure(d, seed)


def _entropy_trial(rec: _Recorder, seed: int, t: int) -> None:
    s = lambda k: _seed(seed, t, k)  # noqa: E731
    rho = random_density(2, seed=s(0))
    sigma = random_density(2, seed=s(1))
    diff = rho - sigma
    klein = 0.5 * float(np.real(np.trace(diff @ diff)))
    rec.add("klein", relative_entropy(rho, sigma) - klein)

    ch = random_channel(2, 2, 2, seed=s(2))
    rec.add("monotonicity", relative_entropy(rho, sigma)
            - relative_entropy(apply_channel(ch, rho), apply_channel(ch, sigma)))

    m3 = MultipartiteState(random_density(8, seed=s(3)), (2, 2, 2))
    rec.add("strong_subadditivity", conditional_mutual_information(m3, [0], [2], [1]))

    m2 = MultipartiteState(random_density(4, seed=s(4)), (2, 2))
    h1, h2, h12 = (subsystem_entropy(m2, J) for J in ([0], [1], [0, 1]))
    rec.add("triangle", h12 - abs(h1 - h2))
    rec.add("info_upper", 2 * min(h1, h2) - mutual_information(m2, [0], [1]))

    mp = MultipartiteState(_random_pure_density(6, s(5)), (2, 3))
    rec.add("pure_common_state", -abs(subsystem_entropy(mp, [0]) - subsystem_entropy(mp, [1])))

    # close pairs for the continuity bound
    rng = np.random.default_rng(s(6))
    eps = rng.uniform(0.0, 0.5)
    tau = random_density(3, seed=s(7))
    near = (1 - eps) * tau + eps * random_density(3, seed=s(8))
    theta = trace_norm(tau - near)
    if theta <= 0.5:
        rec.add("fannes", fannes_bound(theta, 3) - abs(von_neumann_entropy(tau) - von_neumann_entropy(near)))

    pov = random_projective_povm(3, seed=s(9), blocks=2)
    rec.add("pinching_increase", von_neumann_entropy(pinching(tau, pov.elements)) - von_neumann_entropy(tau))

    W = CqChannel([random_density(2, seed=s(10)), random_density(2, seed=s(11))])
    P = rng.dirichlet([1, 1])
    g = channel_state(P, W)
    rec.add("conditional_entropy_classical", conditional_entropy(g, [0], [1]))
    rec.add("conditional_entropy_classical", conditional_entropy(g, [1], [0]))

    # two independent uses of a cq channel
    P2 = np.kron(P, rng.dirichlet([1, 1]))
    W2 = CqChannel([np.kron(W[a], W[b]) for a in range(2) for b in range(2)])
    g2 = channel_state(P2, W2)
    big = MultipartiteState(g2.state, (2, 2, 2, 2), ("X1", "X2", "Y1", "Y2"), (True, True, False, False))
    joint = mutual_information(big, [0, 1], [2, 3])
    parts = mutual_information(big, [0], [2]) + mutual_information(big, [1], [3])
    rec.add("information_subadditivity", parts - joint)

    guess = random_povm(2, 2, seed=s(12))
    pe = 1 - sum(P[x] * np.real(np.trace(W[x] @ guess.elements[x])) for x in range(2))
    rec.add("fano", fano_bound(float(np.clip(pe, 0, 1)), 2) - conditional_entropy(g, [0], [1]))


def _fidelity_trial(rec: _Recorder, seed: int, t: int) -> None:
    s = lambda k: _seed(seed, t, k)  # noqa: E731
    rho = _random_pure_density(3, s(0))
    sigma = _random_pure_density(3, s(1))
    F = fidelity_pure(rho, sigma)
    D = trace_distance(rho, sigma)
    rec.add("pure_pure", -abs((1 - F) - D * D))
    mixed = random_density(3, seed=s(2))
    F = fidelity_pure(rho, mixed)
    D = trace_distance(rho, mixed)
    rec.add("mixed_upper", D - (1 - F))
    rec.add("mixed_lower", (1 - F) - D * D)
    r1, r2 = random_density(2, seed=s(3)), random_density(2, seed=s(4))
    q1, q2 = random_density(2, seed=s(5)), random_density(2, seed=s(6))
    rec.add("tensor_triangle", trace_norm(r1 - q1) + trace_norm(r2 - q2)
            - trace_norm(np.kron(r1, r2) - np.kron(q1, q2)))
    p1, p2 = _random_pure_density(2, s(7)), _random_pure_density(2, s(8))
    u1, u2 = _random_pure_density(2, s(9)), _random_pure_density(2, s(10))
    lhs = 1 - fidelity_pure(np.kron(p1, p2), np.kron(u1, u2))
    rec.add("infidelity_subadditivity", (1 - fidelity_pure(p1, u1)) + (1 - fidelity_pure(p2, u2)) - lhs)


def _tender_trial(rec: _Recorder, seed: int, t: int) -> None:
    s = lambda k: _seed(seed, t, k)  # noqa: E731
    rho = random_density(3, seed=s(0))
    X = random_povm(3, 2, seed=s(1)).elements[0]
    lam = 1 - float(np.real(np.trace(rho @ X)))
    rec.add("tender_operator", math.sqrt(8 * max(lam, 0.0)) - tender_residual(rho, X, lam))

    # identification family: each state is the top eigenvector of its effect
    D = random_povm(3, 3, seed=s(2))
    states = []
    for E in D.elements:
        w, v = np.linalg.eigh(E)
        states.append(projector(v[:, -1]))
    lam = max(1 - float(np.real(np.trace(r @ E))) for r, E in zip(states, D.elements))
    interior = povm_interior(D)
    for r in states:
        rec.add("tender_measurement", math.sqrt(8 * lam) + lam - trace_norm(r - apply_channel(interior, r)))


def _holevo_trial(rec: _Recorder, seed: int, t: int) -> None:
    s = lambda k: _seed(seed, t, k)  # noqa: E731
    rng = np.random.default_rng(s(0))
    a = int(rng.integers(2, 4))
    d = int(rng.integers(2, 4))
    W = CqChannel([random_density(d, seed=s(1 + x)) for x in range(a)])
    P = rng.dirichlet(np.ones(a))
    povm = random_povm(d, int(rng.integers(2, 4)), seed=s(10))
    joint = measured_joint(P, W, povm)
    rec.add("holevo_bound", holevo_information(P, W) - classical_mutual_information(joint))


def _coherent_trial(rec: _Recorder, seed: int, t: int) -> None:
    s = lambda k: _seed(seed, t, k)  # noqa: E731
    rho = random_density(4, seed=s(0))
    ch1 = random_channel(2, 2, 2, seed=s(1))
    ch2 = random_channel(2, 2, 2, seed=s(2))
    rec.add("weak_subadditivity", weak_subadditivity_gap(rho, (2, 2), ch1, ch2))
    r = random_density(3, seed=s(3))
    ch = random_channel(3, 3, 2, seed=s(4))
    Ie = coherent_information(r, ch)
    Fe = entanglement_fidelity(r, ch)
    rec.add("coherent_upper", von_neumann_entropy(apply_channel(ch, r)) - Ie)
    rec.add("quantum_fano", Ie + 2 + 4 * (1 - Fe) * math.log2(3) - von_neumann_entropy(r))


SUITES: dict[str, tuple[Callable, tuple]] = {
    "entropy": (_entropy_trial, (
        "klein", "monotonicity", "strong_subadditivity", "triangle", "info_upper", "pure_common_state",
        "fannes", "pinching_increase", "conditional_entropy_classical", "information_subadditivity", "fano",
    )),
    "fidelity": (_fidelity_trial, (
        "pure_pure", "mixed_upper", "mixed_lower", "tensor_triangle", "infidelity_subadditivity",
    )),
    "tender": (_tender_trial, ("tender_operator", "tender_measurement")),
    "holevo": (_holevo_trial, ("holevo_bound",)),
    "coherent": (_coherent_trial, ("weak_subadditivity", "coherent_upper", "quantum_fano")),
}


def run_suite(name: str, trials: int, seed: int) -> list:
    """Per-inequality minimum slack over ``trials`` seeded instances."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if trials < 0:
        raise ConfigError("trials must be nonnegative")
    fn, names = SUITES[name]
    rec = _Recorder(names)
    for t in range(trials):
        fn(rec, seed, t)
    return [SuiteRow(name, k, rec.count[k], rec.slack[k] if rec.count[k] else 0.0) for k in names]

