"""
Rate regions for two correlated quantum sources
================================================

We print the outer bounds for the cloned wheel, the EPR pair source and the
cloned cross, then show how a different realization of the same average
state tightens them.
"""

from qshannon.entropy import von_neumann_entropy
from qshannon.fixtures import binary_adder_mac, cloned_cross, cloned_wheel, epr_source, source_state, triplet_weights
from qshannon.regions import all_corner_points, coherent_info_bounds, mac_outer_region, multi_source_bounds


def show(name, poly):
    parts = [f"R{'+R'.join(str(i + 1) for i in J)} >= {poly.value(J):.3f}" for J, _, _ in poly.constraints]
    print(f"  {name:28s} " + ", ".join(parts))


wheel = cloned_wheel()
print(f"cloned wheel: H = {von_neumann_entropy(wheel.average()):.3f}, "
      f"Bell weights {tuple(round(w, 6) for w in triplet_weights(wheel.average()))}")
show("average-fidelity bound", multi_source_bounds(source_state(wheel)))

epr = epr_source()
m = source_state(epr)
print("\nEPR source")
show("average-fidelity bound", multi_source_bounds(m))
show("coherent information bound", coherent_info_bounds(m))
# realizing the average with maximally entangled states forces each rate up
show("with the EPR realization", coherent_info_bounds(m, realizations=[epr]))

cross = source_state(cloned_cross())
print("\ncloned cross (same average state as the EPR source)")
fbar = multi_source_bounds(cross)
show("average-fidelity bound", fbar)
show("with the EPR realization", coherent_info_bounds(cross, realizations=[epr]))
print(f"  (1, 0) inside the average-fidelity bound: {fbar.contains((1.0, 0.0))}")

# The classical binary adder as a two-sender channel, for comparison.
mac = mac_outer_region(binary_adder_mac(), [[0.5, 0.5], [0.5, 0.5]])
print("\nbinary adder MAC corners", [tuple(round(v, 6) for v in c) for c in all_corner_points(mac)])
