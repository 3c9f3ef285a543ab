"""
Parameter-counting lower bounds
===============================

How many entangling gates could an n-qubit task possibly need? A circuit
with N m-qubit CZ gates carries 2n + 2mN free parameters for state
preparation (3n + 2mN for unitary synthesis); the target manifold has
2*2^n - 2 (or 4^n - 1). The crossing point is a hard lower bound on N.
"""

from qcsynth import circuit_params, lower_bound, target_params

print("four-qubit state preparation")
need = target_params("state", 4)
print(f"  target parameters: {need}")
for m in (2, 3, 4):
    lb = lower_bound("state", 4, m)
    series = [circuit_params("state", 4, m, N) for N in range(lb + 2)]
    print(f"  m={m}: circuit params by N: {series}  -> lower bound N={lb}")

print()
print("three-qubit unitary synthesis")
need = target_params("unitary", 3)
print(f"  target parameters: {need}")
for m in (2, 3):
    print(f"  m={m}: lower bound N={lower_bound('unitary', 3, m)}")

# The brute-force searches in the other demos show which of these bounds
# are tight (4-qubit state prep: yes at N=6) and which are not (3-qubit
# state prep needs N=3, one above the bound).
