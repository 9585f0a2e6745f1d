"""
Compressing a qubit source onto its typical subspace
=====================================================

A source emits |0> with probability 0.9 and |1> otherwise.  We keep the
variance-typical subspace of n letters and watch the rate approach the
entropy while the entanglement fidelity stays above its guaranteed floor.
"""

import math

from qshannon.entropy import shannon_entropy
from qshannon.fixtures import diagonal_source
from qshannon.source_coding import (
    scheme_fidelities,
    schumacher_fidelity_bound,
    schumacher_rate_bound,
    schumacher_scheme,
    strong_converse_log2_dim_bound,
    truncation_scheme,
)

source = diagonal_source([0.9, 0.1])
rho = source.average()
H = shannon_entropy([0.9, 0.1])
alpha = 4.0
print(f"H(rho) = {H:.4f} bits per letter")
print(f"guaranteed F_e >= {schumacher_fidelity_bound(rho, alpha):.4f} for alpha = {alpha}")

# The code dimension is the number of typical sequences.  Counting them by
# type keeps n = 1024 cheap even though the space has 2^1024 dimensions.
print(f"{'n':>6} {'rate':>8} {'rate bound':>11} {'F_e':>10}")
for n in (16, 64, 256, 1024):
    scheme = schumacher_scheme(rho, n, alpha)
    Fe = scheme_fidelities(scheme, source).entanglement_fidelity
    print(f"{n:6d} {scheme.rate:8.4f} {schumacher_rate_bound(rho, n, alpha):11.4f} {Fe:10.6f}")

# Going below the entropy does not pay: keep only the 2^(0.8 n H) most
# likely sequences and the fidelity collapses.
n = 256
scheme = truncation_scheme(rho, n, int(2 ** (0.8 * H * n)))
F = scheme_fidelities(scheme, source).average_fidelity
print(f"\nrank truncation at 0.8 H, n = {n}: average fidelity {F:.4f}")
print(f"log2 dim = {math.log2(scheme.code_dim):.1f}, "
      f"converse asks for >= {strong_converse_log2_dim_bound(rho, n, 1 - F):.1f}")
