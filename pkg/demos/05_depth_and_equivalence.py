"""
Circuit depth and configuration equivalence
===========================================

Depth packs adjacent gates on disjoint qubits into shared layers; on three
qubits every pair overlaps, so depth always equals the gate count, while
four-qubit circuits can parallelize. Configurations related by qubit
relabeling or time reversal perform identically, which shrinks the list of
genuinely different solutions.
"""

import itertools

from qcsynth import GateConfiguration, depth, parse_config, permute, reverse

# A four-qubit, six-gate layout that packs into four layers: the second and
# third gates act on disjoint pairs, as do the fifth and sixth.
c = parse_config("6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)")
print(f"{c}  -> depth {depth(c)}")

# Serial worst case: every gate on the same pair.
serial = GateConfiguration(4, 2, tuple([(0, 1)] * 6))
print(f"{serial}  -> depth {depth(serial)}")

# Unused couplings matter for hardware with a broken pair: this layout
# never touches (0,3) or (1,2).
from qcsynth.analysis import pair_usage

usage, unused = pair_usage(c)
print(f"pair usage: {usage}")
print(f"unused pairs: {unused}")

# Relabeling qubits permutes the layout but not its performance; counting
# orbits under all 24 relabelings of four qubits:
orbit = {permute(c, p).config_id for p in itertools.permutations(range(4))}
print(f"orbit size under relabeling: {len(orbit)}")

# Time reversal gives another equivalent layout whenever the target is its
# own inverse (CZ-only circuits are palindromic in that sense).
r = reverse(c)
print(f"reversed: {r}  -> depth {depth(r)}")
