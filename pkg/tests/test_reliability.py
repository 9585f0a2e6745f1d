import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qshannon.entropy import CqChannel, holevo_information
from qshannon.fixtures import bsc, constant_channel, pure_pair_channel
from qshannon.objects import diagonal_state
from qshannon.reliability import (
    exponent_collective,
    exponent_individual,
    greedy_exponent,
    greedy_exponent_point,
    sphere_packing_exponent,
    sphere_packing_point,
    zero_rate_sphere_packing,
)

GRID = np.linspace(0, 1, 801)


def _h(t):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -t * np.log2(t) - (1 - t) * np.log2(1 - t)
    return np.nan_to_num(v)


def _d(a, b):
    """Binary divergence D([1-a, a] || [1-b, b]) elementwise."""
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(a > 0, a * np.log2(a / b), 0.0)
        y = np.where(a < 1, (1 - a) * np.log2((1 - a) / (1 - b)), 0.0)
    return x + y


def grid_sphere_packing(w0, w1, P, R):
    """min over binary V of D(V||W|P) subject to I(P;V) <= R, on a grid."""
    a, b = np.meshgrid(GRID, GRID, indexing="ij")
    out = P[0] * a + P[1] * b
    info = _h(out) - P[0] * _h(a) - P[1] * _h(b)
    div = P[0] * _d(a, w0) + P[1] * _d(b, w1)
    return float(div[info <= R + 1e-12].min())


BSC = bsc(0.1)
I_BSC = holevo_information([0.5, 0.5], BSC)


@pytest.mark.parametrize("R", [0.05, 0.1, 0.2, 0.3, 0.45])
def test_sphere_packing_matches_classical_grid(R):
    P = np.array([0.5, 0.5])
    got = sphere_packing_exponent(BSC, P, R)
    assert got == pytest.approx(grid_sphere_packing(0.1, 0.9, P, R), abs=2e-3)


@pytest.mark.parametrize("R", [0.1, 0.25])
def test_sphere_packing_asymmetric_input(R):
    W = CqChannel([diagonal_state([0.95, 0.05]), diagonal_state([0.3, 0.7])])
    P = np.array([0.6, 0.4])
    got = sphere_packing_exponent(W, P, R)
    assert got == pytest.approx(grid_sphere_packing(0.05, 0.7, P, R), abs=2e-3)


def test_sphere_packing_point_is_feasible():
    pt = sphere_packing_point(BSC, [0.5, 0.5], 0.2)
    assert pt.information <= 0.2 + 1e-6
    assert not pt.upper_estimate
    assert pt.V is not None


def test_sphere_packing_shape():
    P = [0.5, 0.5]
    rates = np.linspace(0.0, I_BSC + 0.05, 12)
    vals = [sphere_packing_exponent(BSC, P, r) for r in rates]
    assert all(x >= y - 1e-9 for x, y in zip(vals, vals[1:]))
    assert sphere_packing_exponent(BSC, P, I_BSC) == 0.0
    assert vals[-1] == 0.0


def test_zero_rate_value():
    # diagonal case: -log sum_j prod_x w_x(j)^P(x)
    expected = -math.log2(2 * math.sqrt(0.1 * 0.9))
    assert zero_rate_sphere_packing(BSC, [0.5, 0.5]) == pytest.approx(expected)
    assert sphere_packing_exponent(BSC, [0.5, 0.5], 0.0) == pytest.approx(expected)


def test_zero_rate_by_constant_auxiliary_channels():
    # at R=0 the auxiliary channel is constant: min over sigma of sum_x P(x) D(sigma||W_x)
    W = pure_pair_channel()
    P = np.array([0.5, 0.5])
    mixed = CqChannel([diagonal_state([0.9, 0.1]), 0.8 * W[1] + 0.1 * np.eye(2)])
    val = zero_rate_sphere_packing(mixed, P)
    from qshannon.entropy import relative_entropy
    from qshannon.objects import random_density
    best = min(sum(P[x] * relative_entropy(s, mixed[x]) for x in range(2))
               for s in (random_density(2, seed=k) for k in range(400)))
    assert val <= best + 1e-9
    assert val >= best - 0.05


def test_disjoint_supports_give_infinite_zero_rate_exponent():
    W = CqChannel([diagonal_state([1, 0]), diagonal_state([0, 1])])
    assert zero_rate_sphere_packing(W, [0.5, 0.5]) == math.inf


def test_noncommuting_sphere_packing_is_flagged():
    pt = sphere_packing_point(CqChannel([diagonal_state([0.9, 0.1]), 0.8 * pure_pair_channel()[1] + 0.1 * np.eye(2)]),
                              [0.5, 0.5], 0.1)
    assert pt.upper_estimate
    assert pt.value > 0


# greedy exponent


def test_greedy_exponent_on_pure_fixture():
    W = pure_pair_channel()
    P = [0.5, 0.5]
    I = holevo_information(P, W)
    for R in np.linspace(0.0, I - 0.06, 5):
        assert greedy_exponent(W, P, R) > 0
    for R in (I + 0.01, I + 0.2):
        assert greedy_exponent(W, P, R) == 0.0


def test_greedy_below_sphere_packing_on_bsc():
    P = [0.5, 0.5]
    for R in (0.05, 0.2, 0.4):
        assert greedy_exponent(BSC, P, R) <= sphere_packing_exponent(BSC, P, R) + 1e-9


def test_greedy_exponent_nonincreasing():
    P = [0.5, 0.5]
    vals = [greedy_exponent(BSC, P, r) for r in np.linspace(0, 0.6, 13)]
    assert all(x >= y - 1e-9 for x, y in zip(vals, vals[1:]))


def test_greedy_maximiser_balances_terms():
    pt = greedy_exponent_point(BSC, [0.5, 0.5], 0.2)
    assert pt.individual == pytest.approx(0.5 * pt.collective, abs=1e-6)
    assert pt.Lp == pytest.approx(pt.L + 0.2)


def test_identical_outputs_have_zero_greedy_exponent():
    W = constant_channel()
    assert greedy_exponent(W, [0.5, 0.5], 0.0) == 0.0
    assert greedy_exponent(W, [0.5, 0.5], 0.3) == 0.0


@pytest.mark.parametrize("L", [0.5, 0.6, 0.8])
def test_individual_exponent_against_grid(L):
    P = np.array([0.5, 0.5])
    a, b = np.meshgrid(GRID, GRID, indexing="ij")
    cond = P[0] * _h(a) + P[1] * _h(b)
    div = P[0] * _d(a, 0.1) + P[1] * _d(b, 0.9)
    assert exponent_individual(BSC, P, L) == pytest.approx(float(div[cond > L].min()), abs=2e-3)


def test_individual_and_collective_edges():
    P = [0.5, 0.5]
    assert exponent_individual(BSC, P, 0.1) == 0.0
    assert exponent_individual(BSC, P, 1.0) == math.inf
    assert exponent_collective(BSC, P, 1.0) == 0.0


@settings(max_examples=15)
@given(st.floats(0.02, 0.3), st.floats(0.0, 0.6))
def test_exponent_ordering_random_bsc(p, R):
    W = bsc(p)
    P = [0.5, 0.5]
    sp = sphere_packing_exponent(W, P, R)
    g = greedy_exponent(W, P, R)
    assert 0 <= g <= sp + 1e-7


@pytest.mark.parametrize("R", [1e-6, 1e-9, 1e-14, 1e-200])
def test_tiny_rates_approach_zero_rate_value(R):
    W = bsc(0.03)
    E0 = zero_rate_sphere_packing(W, [0.5, 0.5])
    pt = sphere_packing_point(W, [0.5, 0.5], R)
    assert pt.value <= E0 + 1e-12
    assert pt.value == pytest.approx(E0, abs=10 * math.sqrt(R) + 1e-6)
    assert pt.upper_estimate == (pt.V is None)


def test_tiny_rate_matches_grid():
    got = sphere_packing_exponent(BSC, [0.5, 0.5], 1e-6)
    assert got == pytest.approx(grid_sphere_packing(0.1, 0.9, np.array([0.5, 0.5]), 1e-6), abs=2e-3)


def test_pure_outputs_have_infinite_exponent_below_capacity():
    W = pure_pair_channel()
    I = holevo_information([0.5, 0.5], W)
    pt = sphere_packing_point(W, [0.5, 0.5], 0.3)
    assert pt.value == math.inf and not pt.upper_estimate
    assert sphere_packing_exponent(W, [0.5, 0.5], I + 0.01) == 0.0
