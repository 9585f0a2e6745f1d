"""
Greedy codes for a channel with nonorthogonal outputs
======================================================

Input 0 produces |0>, input 1 produces |+>.  We compute the Holevo capacity,
build maximal codes letter by letter at small block lengths, and compare
the two error exponents at a few rates.
"""

import math

from qshannon.channel_coding import BlockCqChannel, code_rate_bound, error_probability, greedy_maximal_code
from qshannon.entropy import holevo_information
from qshannon.fixtures import pure_pair_channel
from qshannon.regions import letter_divergences, optimize_holevo
from qshannon.reliability import greedy_exponent, sphere_packing_exponent

W = pure_pair_channel()
res = optimize_holevo(W)
print(f"capacity {res.capacity:.6f} at P = {res.distribution.round(6)}")
# every letter's divergence from the optimal output sits at or below C
print("letter divergences", letter_divergences(W, res.distribution).round(9))

# With the default shadow threshold the construction is very conservative;
# raising it trades the proof's margin for larger codes that still meet lambda.
lam = 0.3
for eta in (None, 0.3):
    print(f"\nshadow threshold {'default' if eta is None else eta}")
    for n in (6, 8, 10):
        ch = BlockCqChannel.stationary(W, n)
        code = greedy_maximal_code(ch, [0.5, 0.5], lam=lam, eta=eta)
        err = error_probability(code, ch, "max")
        print(f"  n={n:2d} |M|={code.size:3d} rate={code.rate:.3f} max error={err:.4f} "
              f"log|M|={math.log2(code.size):.2f} <= {code_rate_bound(W, code, lam):.1f}")

# Pure outputs leave no room for an auxiliary channel, so the sphere-packing
# exponent is infinite below I(P;W); the greedy exponent stays finite.
I = holevo_information([0.5, 0.5], W)
print(f"\nI(P;W) = {I:.4f}")
for R in (0.1, 0.3, 0.5, 0.7):
    print(f"  R={R:.1f}  E_sp={sphere_packing_exponent(W, [0.5, 0.5], R):.4g}  "
          f"E_g={greedy_exponent(W, [0.5, 0.5], R):.4g}")
