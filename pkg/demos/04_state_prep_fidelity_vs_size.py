"""
Best achievable fidelity as a function of circuit size
======================================================

For state preparation the interesting quantity is the maximum fidelity
over every gate configuration at each circuit size N. One CZ suffices for
two qubits; three qubits need N=3 two-qubit gates (one more than the
parameter-counting bound) but only N=2 three-qubit CZ gates.
"""

from qcsynth import OptimizerSettings, random_target
from qcsynth.search import fidelity_vs_N

settings = OptimizerSettings(max_iterations=3000, seed=5)

print("two qubits, random target:")
target2 = random_target("state", 2, 1)
for point in fidelity_vs_N(target2, 2, 2, [0, 1], settings, restarts=3, workers=2):
    print(f"  N={point['N']}: 1-F = {1 - point['fidelity']:.3e}")

print("three qubits, two-qubit CZ gates:")
target3 = random_target("state", 3, 2)
for point in fidelity_vs_N(target3, 3, 2, [1, 2, 3], settings, restarts=3, workers=2):
    print(f"  N={point['N']}: 1-F = {1 - point['fidelity']:.3e}")

print("three qubits, three-qubit CZ gates:")
for point in fidelity_vs_N(target3, 3, 3, [1, 2], settings, restarts=3, workers=2):
    print(f"  N={point['N']}: 1-F = {1 - point['fidelity']:.3e}")

# Averaging over several random instances (and keeping the worst case)
# smooths out instance-to-instance variation:
instances = [random_target("state", 3, 100 + k) for k in range(3)]
series = fidelity_vs_N(instances, 3, 2, [2, 3], settings, restarts=2, workers=2)
for point in series:
    print(
        f"worst over {len(instances)} instances at N={point['N']}: "
        f"1-F = {1 - point['fidelity']:.3e}"
    )
