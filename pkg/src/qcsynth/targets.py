"""Target states and unitaries: random generation, named gates, fidelities.

Random targets follow a two-step recipe: draw uniform complex entries and
orthonormalize, then reduce the distribution bias by multiplying with ten
further random unitaries (``debias``). The result is not Haar-uniform and
does not need to be; it only has to avoid special-case targets such as
separable states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import unitarity_defect
from .seeds import child_rng

NORM_TOL = 1e-12
GS_REDRAW_TOL = 1e-8
DEBIAS_ROUNDS = 10


@dataclass(frozen=True)
class TargetSpec:
    """A state-preparation or unitary-synthesis target.

    kind is "state" (payload: unit vector of length 2**n) or "unitary"
    (payload: 2**n x 2**n unitary matrix). ``source`` records provenance for
    manifests and reports.
    """

    kind: str
    n: int
    payload: np.ndarray = field(repr=False)
    source: str = "unknown"

    def __post_init__(self):
        if self.kind not in ("state", "unitary"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        dim = 2**self.n
        payload = np.asarray(self.payload, dtype=np.complex128)
        object.__setattr__(self, "payload", payload)
        if self.kind == "state":
            if payload.shape != (dim,):
                raise ValueError(f"state payload shape {payload.shape}, want ({dim},)")
            if abs(np.linalg.norm(payload) - 1.0) > NORM_TOL:
                raise ValueError("state target is not normalized")
        else:
            if payload.shape != (dim, dim):
                raise ValueError(
                    f"unitary payload shape {payload.shape}, want ({dim}, {dim})"
                )
            if unitarity_defect(payload) > NORM_TOL:
                raise ValueError("unitary target fails the unitarity check")


def random_state(n, rng):
    """Random n-qubit state: uniform re/im parts on [-1, 1], then normalized."""
    dim = 2**n
    z = rng.uniform(-1.0, 1.0, dim) + 1j * rng.uniform(-1.0, 1.0, dim)
    return z / np.linalg.norm(z)


def random_unitary(n, rng):
    """Random unitary built column by column with Gram-Schmidt.

    Each new column is drawn like a random state, orthogonalized against all
    previous columns and normalized; a column is redrawn in the measure-zero
    event that the projection leaves almost nothing. The finished matrix gets
    a random column permutation.
    """
    dim = 2**n
    cols = np.empty((dim, dim), dtype=np.complex128)
    k = 0
    while k < dim:
        v = rng.uniform(-1.0, 1.0, dim) + 1j * rng.uniform(-1.0, 1.0, dim)
        for j in range(k):
            v -= np.vdot(cols[:, j], v) * cols[:, j]
        norm = np.linalg.norm(v)
        if norm < GS_REDRAW_TOL:
            continue
        cols[:, k] = v / norm
        k += 1
    return cols[:, rng.permutation(dim)]


def debias(target, rng):
    """Left-multiply a random target by ten fresh random unitaries.

    Reduces the bias of the raw generation recipe; preserves state norm and
    operator unitarity exactly up to roundoff.
    """
    payload = target.payload
    for _ in range(DEBIAS_ROUNDS):
        payload = random_unitary(target.n, rng) @ payload
    if target.kind == "state":
        payload = payload / np.linalg.norm(payload)
    return TargetSpec(target.kind, target.n, payload, target.source)


def random_target(kind, n, seed):
    """Seeded random target of the given kind, including the debias step."""
    rng = child_rng(seed)
    if kind == "state":
        raw = TargetSpec("state", n, random_state(n, rng), f"random-state:seed={seed}")
    elif kind == "unitary":
        raw = TargetSpec(
            "unitary", n, random_unitary(n, rng), f"random-unitary:seed={seed}"
        )
    else:
        raise ValueError(f"unknown target kind {kind!r}")
    return debias(raw, rng)


def multi_cz(n, qubits):
    """m-qubit controlled-Z: -1 on basis states where every listed qubit is 1."""
    qubits = sorted(set(qubits))
    if len(qubits) < 2:
        raise ValueError("multi_cz needs at least two qubits")
    if qubits[0] < 0 or qubits[-1] >= n:
        raise ValueError(f"qubits {qubits} out of range for n={n}")
    dim = 2**n
    mask = 0
    for q in qubits:
        mask |= 1 << (n - 1 - q)
    diag = np.ones(dim, dtype=np.complex128)
    idx = np.arange(dim)
    diag[(idx & mask) == mask] = -1.0
    return np.diag(diag)


def toffoli(n):
    """n-qubit Toffoli: qubits 0..n-2 control a NOT on qubit n-1.

    As a matrix this swaps the last two basis states and fixes the rest.
    """
    if n < 3:
        raise ValueError("toffoli needs n >= 3")
    dim = 2**n
    u = np.eye(dim, dtype=np.complex128)
    u[dim - 2 : dim, dim - 2 : dim] = [[0.0, 1.0], [1.0, 0.0]]
    return u


def toffoli_target(n):
    return TargetSpec("unitary", n, toffoli(n), f"toffoli{n}")


def state_fidelity(psi, target):
    """|<target|psi>|^2 for normalized pure states."""
    psi = np.asarray(psi)
    target = np.asarray(target)
    if psi.shape != target.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {target.shape}")
    return float(abs(np.vdot(target, psi)) ** 2)


def unitary_fidelity(u, target):
    """|Tr(target^dagger u) / 2**n|^2; invariant under global phases."""
    u = np.asarray(u)
    target = np.asarray(target)
    if u.shape != target.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {target.shape}")
    dim = u.shape[0]
    return float(abs(np.vdot(target, u) / dim) ** 2)


def target_fidelity(spec, achieved):
    """Fidelity of an achieved state/operator with respect to a TargetSpec."""
    if spec.kind == "state":
        return state_fidelity(achieved, spec.payload)
    return unitary_fidelity(achieved, spec.payload)


def save_target(spec, path):
    """Write a target as JSON: n, kind, flat row-major [re, im] pairs."""
    flat = spec.payload.reshape(-1)
    data = {
        "kind": spec.kind,
        "n": spec.n,
        "source": spec.source,
        "data": [[v.real, v.imag] for v in flat],
    }
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_target(path):
    with open(path) as fh:
        data = json.load(fh)
    n = int(data["n"])
    kind = data["kind"]
    flat = np.array([complex(re, im) for re, im in data["data"]])
    shape = (2**n,) if kind == "state" else (2**n, 2**n)
    return TargetSpec(kind, n, flat.reshape(shape), data.get("source", f"file:{path}"))
