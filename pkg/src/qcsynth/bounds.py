"""Parameter-counting lower bounds on entangling-gate counts.

A circuit with N m-qubit CZ gates carries 2n + 2mN independent parameters
for state preparation and 3n + 2mN for unitary synthesis (z-axis rotations
commute through CZ and collapse into earlier layers, leaving two parameters
per post-gate rotation). Matching these against the target manifold
dimension (2*2**n - 2 for states, 4**n - 1 for unitaries) gives the least N
that could possibly reach fidelity 1. All arithmetic is exact integers.
"""

from __future__ import annotations

TASKS = ("state", "unitary")


def _check(task, n, m):
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if n < 1:
        raise ValueError("need n >= 1")
    if not 2 <= m <= n:
        raise ValueError(f"need 2 <= m <= n, got m={m}, n={n}")


def circuit_params(task, n, m, N):
    """Independent parameters in an N-gate circuit with m-qubit entanglers."""
    _check(task, n, m)
    if N < 0:
        raise ValueError("need N >= 0")
    if task == "state":
        return 2 * n + 2 * m * N
    return 3 * n + 2 * m * N


def target_params(task, n):
    """Independent parameters of an arbitrary n-qubit target."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if n < 1:
        raise ValueError("need n >= 1")
    if task == "state":
        return 2 * 2**n - 2
    return 4**n - 1


def lower_bound(task, n, m):
    """Least N whose circuit parameter count reaches the target's."""
    _check(task, n, m)
    if task == "state":
        num = 2**n - 1 - n
        den = m
    else:
        num = 4**n - 1 - 3 * n
        den = 2 * m
    return max(0, -(-num // den))
