import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from qshannon.entropy import CqChannel, classical_divergence, shannon_entropy
from qshannon.errors import DimMismatch
from qshannon.objects import diagonal_state, random_density, random_unitary
from qshannon.typicality import (
    K_CONST,
    TypeVector,
    all_types,
    blow_up,
    bounded_entropy_projector,
    conditional_variance_typical_projector,
    constant_typical_projector,
    constant_typical_size_bound,
    count_compositions,
    entropy_typical_constant,
    entropy_typical_projector,
    exact_cond_type_projector,
    exact_type_projector,
    jhhh_projector,
    min_cross_entropy_entropy_at_least,
    min_divergence_entropy_at_least,
    min_divergence_entropy_at_most,
    shadow_bound,
    truncation_projector,
    type_class,
    type_count_bound,
    universal_mass_bound,
    universal_shadow_bound,
    variance_projector_bounds,
    variance_shadow_bound,
    variance_typical_projector,
    variance_typical_set,
)

from strategies import densities, seeds


def rotated(probs, seed):
    U = random_unitary(len(probs), seed=seed)
    return U @ diagonal_state(probs) @ U.conj().T


def brute_mass(keep, p, n):
    """Sum of sequence probabilities over all sequences with an admitted count vector."""
    total = 0.0
    for seq in itertools.product(range(len(p)), repeat=n):
        c = tuple(np.bincount(seq, minlength=len(p)))
        if keep(c):
            total += math.prod(p[j] for j in seq)
    return total


# type bookkeeping


def test_type_class_enumeration_matches_brute_force():
    t = TypeVector((2, 1, 1))
    brute = {s for s in itertools.product(range(3), repeat=4) if tuple(np.bincount(s, minlength=3)) == t.counts}
    assert set(type_class(t)) == brute
    assert t.class_size() == len(brute) == 12


@pytest.mark.parametrize("n,a", [(5, 2), (7, 3), (4, 4)])
def test_number_of_types(n, a):
    types = all_types(n, a)
    assert len(types) == count_compositions(n, a) == math.comb(n + a - 1, a - 1)
    assert len(types) <= type_count_bound(n, a)


def test_type_parse_and_distribution():
    t = TypeVector.parse("3:1")
    assert t.n == 4 and np.allclose(t.distribution(), [0.75, 0.25])
    assert TypeVector.from_distribution([0.5, 0.5], 6).counts == (3, 3)


# variance-typical sets


def test_variance_set_cardinality_matches_enumeration():
    P = np.array([0.7, 0.3])
    n, alpha = 14, 1.0
    T = variance_typical_set(P, n, alpha)
    radius = alpha * math.sqrt(n * 0.21)
    brute = [s for s in itertools.product(range(2), repeat=n) if abs(sum(1 - np.array(s)) - n * 0.7) <= radius]
    assert T.trace() == len(brute)
    assert all(T.contains(s) for s in brute[:50])


def test_alpha_zero_gives_exact_types_only():
    T = variance_typical_set([0.5, 0.5], 10, 0.0)
    assert T.types == frozenset({((5, 5),)})
    assert variance_typical_set([0.3, 0.7], 10, 0.0).trace() == math.comb(10, 3)
    assert variance_typical_set([0.35, 0.65], 10, 0.0).is_empty()


def test_variance_set_mass_against_binomial():
    P = np.array([0.9, 0.1])
    n, alpha = 100, 3.0
    T = variance_typical_set(P, n, alpha)
    radius = alpha * math.sqrt(n * 0.09)
    k = np.arange(n + 1)
    inside = np.abs(k - n * 0.1) <= radius + 1e-10
    oracle = binom.pmf(k, n, 0.1)[inside].sum()
    mass = T.mass([diagonal_state(P)] * n)
    assert mass == pytest.approx(oracle, abs=1e-12)
    assert mass >= 1 - 2 / alpha ** 2


@pytest.mark.parametrize("n", [20, 60, 100, 200])
@pytest.mark.parametrize("probs", [(0.8, 0.2), (0.6, 0.3, 0.1)])
def test_variance_projector_bounds(n, probs):
    alpha = 2.0
    rho = rotated(probs, seed=n)
    Pi = variance_typical_projector(rho, n, alpha)
    b = variance_projector_bounds(rho, n, alpha)
    B = Pi.bases[0]
    q = np.real(np.diag(B.conj().T @ rho @ B))
    mass = Pi.mass([rho] * n)
    assert mass >= b.chebyshev_mass - 1e-12
    assert mass >= b.hoeffding_mass - 1e-12
    for lw in Pi.log2_weights([q] * n):
        assert b.log2_weight_low - 1e-9 <= lw <= b.log2_weight_high + 1e-9
    assert Pi.log2_trace() <= b.log2_trace_upper + 1e-9
    # trace lower bound from the shadow argument applied to Pi itself
    assert Pi.log2_trace() >= variance_shadow_bound(rho, n, alpha, mass) - 1e-9


def test_variance_projector_weight_window_is_tight_enough_to_matter():
    rho = diagonal_state([0.9, 0.1])
    b = variance_projector_bounds(rho, 200, 2.0)
    assert b.log2_weight_high - b.log2_weight_low == pytest.approx(2 * K_CONST * 2 * 2.0 * math.sqrt(200))


# entropy-typical projectors


def test_entropy_typical_pure_states_have_full_mass():
    rhos = [rotated((1.0, 0.0), seed=s) for s in range(6)]
    Pi = entropy_typical_projector(rhos, 0.1)
    assert Pi.mass(rhos) == pytest.approx(1.0)
    assert Pi.trace() == 1


def test_entropy_typical_heterogeneous_mass_and_trace():
    n = 50
    a, b = diagonal_state([0.8, 0.2]), diagonal_state([0.6, 0.4])
    rhos = [a if i % 2 else b for i in range(n)]
    delta = 2.0
    Pi = entropy_typical_projector(rhos, delta)
    # independent oracle: the surprisal sum is a function of the two binomial counts
    Hs = 25 * shannon_entropy([0.8, 0.2]) + 25 * shannon_entropy([0.6, 0.4])
    oracle = 0.0
    for k1 in range(26):
        for k2 in range(26):
            s = -(25 - k1) * math.log2(0.8) - k1 * math.log2(0.2) - (25 - k2) * math.log2(0.6) - k2 * math.log2(0.4)
            if abs(s - Hs) <= delta * math.sqrt(n) + 1e-9:
                oracle += binom.pmf(k1, 25, 0.2) * binom.pmf(k2, 25, 0.4)
    mass = Pi.mass(rhos)
    assert mass == pytest.approx(oracle, abs=1e-12)
    K = entropy_typical_constant(2)
    assert mass >= 1 - K / delta ** 2
    assert Pi.log2_trace() <= Hs + delta * math.sqrt(n) + 1e-9
    assert Pi.log2_trace() >= math.log2(1 - K / delta ** 2) + Hs - delta * math.sqrt(n)


@settings(max_examples=15)
@given(seeds, st.floats(1.5, 3.0))
def test_entropy_typical_mass_bound_random_qutrits(seed, delta):
    rng = np.random.default_rng(seed)
    rhos = [random_density(3, seed=[seed, i]) for i in range(2)]
    seq = [rhos[int(rng.integers(2))] for _ in range(20)]
    Pi = entropy_typical_projector(seq, delta)
    assert Pi.mass(seq) >= 1 - entropy_typical_constant(3) / delta ** 2 - 1e-12


# constant-typical projectors


def test_constant_typical_covers_everything_for_huge_delta():
    rho = diagonal_state([0.7, 0.3])
    assert constant_typical_projector(rho, 9, 3.0).trace() == 2 ** 9


def test_constant_typical_size_bound():
    rho = rotated((0.7, 0.3), seed=3)
    Pi = constant_typical_projector(rho, 100, 2.0)
    assert Pi.log2_trace() <= constant_typical_size_bound(rho, 100, 2.0)
    with pytest.raises(ValueError):
        constant_typical_size_bound(rho, 100, 5.0 + 1e-6 + 0.1)


def _poisson_binomial(ps):
    dist = np.array([1.0])
    for p in ps:
        dist = np.convolve(dist, [1 - p, p])
    return dist


@settings(max_examples=20)
@given(seeds, st.integers(2, 4), st.floats(1.2, 3.0))
def test_weak_law_for_varying_states(seed, d, delta):
    # states diagonal in a common basis so that the oracle is a product of Poisson-binomials
    rng = np.random.default_rng(seed)
    n = 30
    rows = rng.dirichlet(np.ones(d), size=n)
    avg = rows.mean(axis=0)
    eps = float(rng.uniform(0, 0.05))
    target = avg + eps * (rng.dirichlet(np.ones(d)) - avg)
    gap = np.abs(avg - target).max()
    Pi = constant_typical_projector(diagonal_state(target), n, delta + gap * math.sqrt(n))
    mass = Pi.mass([diagonal_state(r) for r in rows])
    assert mass >= 1 - d / (4 * delta ** 2) - 1e-12
    assert mass >= 1 - 1 / delta ** 2
    if d == 2:
        counts = _poisson_binomial(rows[:, 1])
        k = np.arange(n + 1)
        radius = (delta + gap * math.sqrt(n)) * math.sqrt(n)
        inside = np.abs(k - n * target[1]) <= radius + 1e-10
        assert mass == pytest.approx(counts[inside].sum(), abs=1e-10)


# exact types


def test_exact_type_of_maximally_mixed_pair():
    assert exact_type_projector(np.eye(2) / 2, 2).trace() == 2


def test_exact_type_empty_when_not_integral():
    assert exact_type_projector(diagonal_state([0.3, 0.7]), 5).is_empty()


@pytest.mark.parametrize("k", range(50))
def test_exact_type_weight_identity(k):
    rng = np.random.default_rng(k)
    n = int(rng.integers(6, 40))
    counts = rng.multinomial(n, rng.dirichlet(np.ones(3)))
    nu = counts / n
    q = rng.dirichlet(np.ones(3))
    U = random_unitary(3, seed=k)
    rho = U @ diagonal_state(q) @ U.conj().T
    nu_op = U @ diagonal_state(nu) @ U.conj().T
    Pi = exact_type_projector(nu_op, n, basis=U)
    assert Pi.trace() == TypeVector(tuple(int(c) for c in counts)).class_size()
    # each sequence in the class carries weight 2^{-n(D(nu||q) + H(nu))}
    (t,) = Pi.types
    lw = Pi.log2_weight(t, [q] * n)
    expected = -n * (classical_divergence(nu, q) + shannon_entropy(nu))
    assert 2.0 ** lw == pytest.approx(2.0 ** expected, rel=1e-9)
    mass = Pi.mass([rho] * n)
    assert mass <= 2.0 ** (-n * classical_divergence(nu, q)) * (1 + 1e-9)
    assert mass >= (n + 1) ** -3 * 2.0 ** (-n * classical_divergence(nu, q)) * (1 - 1e-9)


def test_exact_type_basis_must_diagonalise():
    with pytest.raises(DimMismatch):
        exact_type_projector(diagonal_state([0.5, 0.5]) + 0.1 * np.array([[0, 1], [1, 0]]), 2, basis=np.eye(2))


def test_exact_conditional_type():
    W = CqChannel([diagonal_state([0.5, 0.5]), diagonal_state([1.0, 0.0])])
    Pi = exact_cond_type_projector(W, (0, 0, 1, 1))
    assert Pi.trace() == 2
    assert Pi.mass([W[x] for x in (0, 0, 1, 1)]) == pytest.approx(0.5)


# symbolic versus dense


SMALL = [
    ("variance", lambda rho, n: variance_typical_projector(rho, n, 1.0)),
    ("constant", lambda rho, n: constant_typical_projector(rho, n, 0.5)),
    ("entropy", lambda rho, n: entropy_typical_projector([rho] * n, 0.6)),
    ("exact", lambda rho, n: exact_type_projector(rho, n)),
    ("bounded", lambda rho, n: bounded_entropy_projector(rho, n, 0.9, ">=")),
    ("truncation", lambda rho, n: truncation_projector(rho, n, 3)),
]


@pytest.mark.parametrize("name,build", SMALL, ids=[s[0] for s in SMALL])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_symbolic_traces_equal_dense(name, build, n):
    probs = (0.5, 0.5) if name == "exact" else (0.7, 0.2, 0.1)
    rho = rotated(probs, seed=n)
    if name == "exact" and n % 2:
        rho = rotated((1.0, 0.0), seed=n)
    Pi = build(rho, n)
    M = Pi.dense()
    assert np.allclose(M @ M, M, atol=1e-10)
    assert round(float(np.real(np.trace(M)))) == Pi.trace()
    dense_mass = float(np.real(np.trace(M @ _power(rho, n))))
    assert Pi.mass([rho] * n) == pytest.approx(dense_mass, abs=1e-10)


def _power(rho, n):
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, rho)
    return out


def test_conditional_variance_dense_small():
    W = CqChannel([rotated((0.8, 0.2), 1), rotated((0.6, 0.4), 2)])
    xn = (0, 1, 0)
    Pi = conditional_variance_typical_projector(W, xn, 1.0)
    M = Pi.dense()
    assert np.allclose(M @ M, M, atol=1e-10)
    state = np.kron(np.kron(W[0], W[1]), W[0])
    assert Pi.mass([W[x] for x in xn]) == pytest.approx(float(np.real(np.trace(M @ state))), abs=1e-10)


def test_conditional_variance_mass_bound():
    W = CqChannel([rotated((0.8, 0.2), 1), rotated((0.65, 0.35), 2)])
    n, delta = 40, 2.0
    xn = tuple([0] * 24 + [1] * 16)
    Pi = conditional_variance_typical_projector(W, xn, delta)
    a, d = 2, 2
    assert Pi.mass([W[x] for x in xn]) >= 1 - a * d / delta ** 2


# universal projectors and divergence minimisation


GRID = np.linspace(0, 1, 200_001)


def _grid_entropy():
    t = GRID[1:-1]
    h = -t * np.log2(t) - (1 - t) * np.log2(1 - t)
    return np.concatenate([[0.0], h, [0.0]])


def _grid_min(values, r, L, at_most):
    h = _grid_entropy()
    ok = h <= L if at_most else h >= L
    return float(values[ok].min())


def _grid_divergence(r):
    t = GRID
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(t > 0, t * np.log2(t / r[0]), 0.0)
        b = np.where(t < 1, (1 - t) * np.log2((1 - t) / r[1]), 0.0)
    return a + b


@pytest.mark.parametrize("L", [0.1, 0.3, 0.6, 0.9])
def test_min_divergence_against_grid(L):
    r = np.array([0.85, 0.15])
    div = _grid_divergence(r)
    assert min_divergence_entropy_at_most(r, L) == pytest.approx(_grid_min(div, r, L, True), abs=1e-4)
    assert min_divergence_entropy_at_least(r, L) == pytest.approx(_grid_min(div, r, L, False), abs=1e-4)
    cross = -GRID * math.log2(r[0]) - (1 - GRID) * math.log2(r[1])
    assert min_cross_entropy_entropy_at_least(r, L) == pytest.approx(_grid_min(cross, r, L, False), abs=1e-4)


def test_min_divergence_edge_cases():
    r = np.array([0.5, 0.3, 0.2])
    assert min_divergence_entropy_at_most(r, 2.0) == 0.0
    assert min_divergence_entropy_at_least(r, 2.0) == math.inf
    assert min_divergence_entropy_at_most(r, 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [20, 60, 100, 200])
def test_universal_mass_and_shadow(n):
    rho = rotated((0.9, 0.1), seed=n)
    L = 0.3
    Pi = bounded_entropy_projector(rho, n, L, ">=")
    mass = Pi.mass([rho] * n)
    assert mass >= universal_mass_bound(rho, n, L) - 1e-12
    eta = 0.9
    lb = universal_shadow_bound(rho, n, L, eta)
    # the most likely sequences form the smallest shadow of a given mass
    T = _smallest_shadow_log2_trace(np.array([0.9, 0.1]), n, eta)
    assert T >= lb - 1e-9


def _smallest_shadow_log2_trace(q, n, eta):
    k = np.arange(n + 1)
    probs = binom.pmf(k, n, q[1])
    order = np.argsort(-(q[1] ** k * q[0] ** (n - k)))
    acc, size = 0.0, 0.0
    for j in order:
        if acc + probs[j] >= eta:
            per = q[1] ** j * q[0] ** (n - j)
            size += math.ceil((eta - acc) / per - 1e-12)
            break
        acc += probs[j]
        size += math.comb(n, int(j))
    return math.log2(size)


@pytest.mark.parametrize("n", [20, 60, 100, 200])
def test_variance_shadow_bound_holds_on_optimal_shadow(n):
    rho = diagonal_state([0.8, 0.2])
    lb = variance_shadow_bound(rho, n, 2.5, 0.95)
    assert _smallest_shadow_log2_trace(np.array([0.8, 0.2]), n, 0.95) >= lb - 1e-9


def test_jhhh_projector_extremes():
    B = np.eye(3, dtype=complex)
    assert jhhh_projector(B, 4, math.log2(3)).trace() == 3 ** 4
    assert jhhh_projector(B, 4, 0.0).trace() == 3


# abstract shadow bound


@settings(max_examples=30)
@given(densities(dim=4), seeds, st.floats(0.3, 1.0))
def test_abstract_shadow_bound(rho, seed, eta):
    w, v = np.linalg.eigh(rho)
    Lam = v[:, 1:] @ v[:, 1:].conj().T
    lam = 1 - float(np.real(np.trace(rho @ Lam)))
    compressed = Lam @ rho @ Lam
    mu2 = float(np.linalg.eigvalsh(compressed)[-1])
    # a random projector shadow completed to reach mass eta
    rng = np.random.default_rng(seed)
    U = random_unitary(4, seed=seed)
    k = int(rng.integers(1, 4))
    B = U[:, :k] @ U[:, :k].conj().T
    m = float(np.real(np.trace(rho @ B)))
    if m < eta:
        B = B + (eta - m) / (1 - m) * (np.eye(4) - B) if m < 1 else B
    m = float(np.real(np.trace(rho @ B)))
    assert np.real(np.trace(B)) >= shadow_bound(min(m, 1.0), lam, mu2) - 1e-9
    assert np.real(np.trace(B)) >= shadow_bound(min(m, 1.0), lam, mu2, commuting=True) - 1e-9
    assert np.real(np.trace(Lam)) >= (1 - lam) / mu2 - 1e-9


def test_shadow_bound_rejects_bad_eta():
    with pytest.raises(ValueError):
        shadow_bound(1.5, 0.1, 0.5)


# blow-up


def test_blow_up_zero_is_support():
    P = np.zeros((4, 4))
    P[0, 0] = 1
    assert np.allclose(blow_up(P, 0, (2, 2)), P)


def test_blow_up_product_example():
    P = np.zeros((4, 4))
    P[0, 0] = 1
    G1 = blow_up(P, 1, (2, 2))
    # |00> blown up on one site spans |00>, |01>, |10>
    assert np.allclose(np.diag(G1), [1, 1, 1, 0])
    assert np.allclose(blow_up(P, 2, (2, 2)), np.eye(4))


@settings(max_examples=20)
@given(seeds, st.integers(1, 3))
def test_blow_up_properties(seed, rank):
    U = random_unitary(8, seed=seed)
    Pi = U[:, :rank] @ U[:, :rank].conj().T
    dims = (2, 2, 2)
    G1 = blow_up(Pi, 1, dims)
    G2 = blow_up(Pi, 2, dims)
    # monotone: Pi <= G1 <= G2 as projectors means range inclusion
    assert np.allclose(G1 @ Pi, Pi, atol=1e-8)
    assert np.allclose(G2 @ G1, G1, atol=1e-8)
    assert np.allclose(blow_up(G1, 1, dims), G2, atol=1e-8)
    q, n = 4, 3
    for l, G in ((1, G1), (2, G2)):
        assert np.real(np.trace(G)) <= (q * n) ** l * rank + 1e-9


def test_constant_typical_mass_by_brute_force():
    p = np.array([0.5, 0.3, 0.2])
    n, delta = 7, 0.6
    Pi = constant_typical_projector(diagonal_state(p), n, delta)
    keep = lambda c: all(abs(c[j] - n * p[j]) <= delta * math.sqrt(n) + 1e-10 for j in range(3))  # noqa: E731
    assert Pi.mass([diagonal_state(p)] * n) == pytest.approx(brute_mass(keep, p, n), abs=1e-12)
