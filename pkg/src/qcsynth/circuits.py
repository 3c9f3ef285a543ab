"""Gate configurations and parameterized circuits.

A configuration is the discrete part of a circuit: an ordered list of qubit
subsets, one per entangling gate. The entangler is either an m-qubit CZ
("cz", symmetric in its qubits) or a controlled-U gate ("cu", a pair whose
2x2 rotation is itself an optimization variable). A ParamCircuit adds the
continuous part: one rotation per qubit up front, one rotation per involved
qubit after each entangling gate, and in cu mode the per-gate 2x2 unitary.

Configurations are value objects with a canonical integer id: subsets are
stored sorted ascending, indexed lexicographically, and the id is the
little-endian mixed-radix number over per-gate subset indices (gate 0 is the
fastest digit). Enumeration yields ids 0..C(n,m)**N - 1 in order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .linalg import I2, embed_single, su2_exp
from .targets import multi_cz

ENTANGLERS = ("cz", "cu")


def _bit_stride(q, n):
    # qubit 0 is the most significant bit of a basis index
    return 1 << (n - 1 - q)


@dataclass(frozen=True)
class GateConfiguration:
    n: int
    m: int
    gates: tuple
    entangler: str = "cz"

    def __post_init__(self):
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"unknown entangler {self.entangler!r}")
        if self.entangler == "cu" and self.m != 2:
            raise ValueError("controlled-U gates act on exactly two qubits")
        if not 2 <= self.m <= self.n:
            raise ValueError(f"need 2 <= m <= n, got m={self.m}, n={self.n}")
        gates = tuple(tuple(sorted(g)) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if len(set(g)) != self.m:
                raise ValueError(f"gate {g} does not have {self.m} distinct qubits")
            if g[0] < 0 or g[-1] >= self.n:
                raise ValueError(f"gate {g} out of range for n={self.n}")

    @property
    def size(self):
        """Number of entangling gates (the circuit-size metric)."""
        return len(self.gates)

    @property
    def config_id(self):
        subsets = subset_table(self.n, self.m)
        base = len(subsets)
        cid = 0
        for j in reversed(range(len(self.gates))):
            cid = cid * base + subsets.index(self.gates[j])
        return cid

    def text(self):
        tag = "cu" if self.entangler == "cu" else str(self.m)
        body = "".join("(" + ",".join(str(q) for q in g) + ")" for g in self.gates)
        return f"{self.size}@{tag}: {body}"

    def __str__(self):
        return self.text()


def subset_table(n, m):
    """Lexicographic list of all size-m qubit subsets of range(n)."""
    return list(itertools.combinations(range(n), m))


def count_configs(n, m, N):
    return comb(n, m) ** N


def config_from_id(n, m, N, config_id, entangler="cz"):
    """Inverse of GateConfiguration.config_id."""
    subsets = subset_table(n, m)
    base = len(subsets)
    if not 0 <= config_id < base**N:
        raise ValueError(f"config_id {config_id} out of range for base {base}, N={N}")
    gates = []
    rem = config_id
    for _ in range(N):
        rem, digit = divmod(rem, base)
        gates.append(subsets[digit])
    return GateConfiguration(n, m, tuple(gates), entangler)


def enumerate_configs(n, m, N, entangler="cz", cap=None):
    """Yield all C(n,m)**N configurations in canonical id order."""
    if not 2 <= m <= n:
        raise ValueError(f"need 2 <= m <= n, got m={m}, n={n}")
    total = count_configs(n, m, N)
    if cap is not None and total > cap:
        raise ValueError(f"{total} configurations exceed the cap of {cap}")
    subsets = subset_table(n, m)
    base = len(subsets)
    for digits in itertools.product(range(base), repeat=N):
        # product varies the last position fastest; gate 0 is the fast digit
        gates = tuple(subsets[d] for d in reversed(digits))
        yield GateConfiguration(n, m, gates, entangler)


def parse_config(text):
    """Parse the `N@m: (0,1)(0,2)...` text form."""
    head, _, body = text.partition(":")
    size_s, _, tag = head.partition("@")
    size = int(size_s)
    entangler = "cu" if tag.strip() == "cu" else "cz"
    m = 2 if entangler == "cu" else int(tag)
    groups = [g for g in body.strip().replace(")", ")|").split("|") if g]
    gates = []
    for g in groups:
        g = g.strip().lstrip("(").rstrip(")")
        gates.append(tuple(int(q) for q in g.split(",")))
    if len(gates) != size:
        raise ValueError(f"expected {size} gates, found {len(gates)} in {text!r}")
    n = max((q for g in gates for q in g), default=m - 1) + 1
    return GateConfiguration(n, m, tuple(gates), entangler)


def depth(config):
    """Circuit depth under ASAP layering.

    Gates are scanned in order; each goes into the earliest layer after every
    earlier gate that shares one of its qubits. Adjacent disjoint gates
    therefore share a layer.
    """
    if config.size == 0:
        raise ValueError("depth is defined for at least one gate")
    qubit_layer = [0] * config.n
    d = 0
    for g in config.gates:
        layer = 1 + max(qubit_layer[q] for q in g)
        for q in g:
            qubit_layer[q] = layer
        d = max(d, layer)
    return d


def permute(config, perm):
    """Relabel qubits: qubit q becomes perm[q]; subsets re-canonicalize."""
    if sorted(perm) != list(range(config.n)):
        raise ValueError(f"{perm} is not a permutation of 0..{config.n - 1}")
    gates = tuple(tuple(sorted(perm[q] for q in g)) for g in config.gates)
    return GateConfiguration(config.n, config.m, gates, config.entangler)


def reverse(config):
    """Time-reversed gate order."""
    return GateConfiguration(
        config.n, config.m, tuple(reversed(config.gates)), config.entangler
    )


def config_digits(n, m, N, config_id):
    """Little-endian per-gate subset indices of a configuration id."""
    base = comb(n, m)
    digits = []
    rem = config_id
    for _ in range(N):
        rem, d = divmod(rem, base)
        digits.append(d)
    return tuple(digits)


def digits_to_id(digits, base):
    cid = 0
    for d in reversed(digits):
        cid = cid * base + d
    return cid


def subset_permutation_maps(n, m):
    """For every qubit permutation, the induced map on subset indices.

    Lets orbit computations run on integer digits instead of rebuilding
    configurations: relabeling a configuration permutes each gate's subset
    index through one of these maps.
    """
    subsets = subset_table(n, m)
    index = {s: i for i, s in enumerate(subsets)}
    maps = []
    for perm in itertools.permutations(range(n)):
        maps.append(
            tuple(index[tuple(sorted(perm[q] for q in s))] for s in subsets)
        )
    return maps


def orbit_of_id(config_id, n, m, N, maps=None, include_reversal=False):
    """All configuration ids reachable by qubit relabeling (and optionally
    time reversal)."""
    if maps is None:
        maps = subset_permutation_maps(n, m)
    base = comb(n, m)
    digits = config_digits(n, m, N, config_id)
    out = set()
    for mp in maps:
        relabeled = tuple(mp[d] for d in digits)
        out.add(digits_to_id(relabeled, base))
        if include_reversal:
            out.add(digits_to_id(relabeled[::-1], base))
    return out


def permutation_operator(perm, n):
    """Unitary that relabels qubit q as perm[q] on basis states."""
    dim = 2**n
    p = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        j = 0
        for q in range(n):
            bit = (i >> (n - 1 - q)) & 1
            j |= bit << (n - 1 - perm[q])
        p[j, i] = 1.0
    return p


# --- parameterized circuits -------------------------------------------------


@dataclass
class ParamCircuit:
    """A configuration plus all of its rotation parameters.

    init_rot: (n, 2, 2) rotations applied first, one per qubit.
    post_rot: (N, m, 2, 2) rotations after gate j, slot k for the k-th qubit
        of the sorted subset.
    cu_rot: (N, 2, 2) controlled-U rotations, cu mode only, else None.
    """

    config: GateConfiguration
    init_rot: np.ndarray
    post_rot: np.ndarray
    cu_rot: np.ndarray = None

    def __post_init__(self):
        n, m, N = self.config.n, self.config.m, self.config.size
        self.init_rot = np.asarray(self.init_rot, dtype=np.complex128).reshape(n, 2, 2)
        self.post_rot = np.asarray(self.post_rot, dtype=np.complex128).reshape(
            N, m, 2, 2
        )
        if self.config.entangler == "cu":
            if self.cu_rot is None:
                raise ValueError("cu-mode circuit needs cu_rot")
            self.cu_rot = np.asarray(self.cu_rot, dtype=np.complex128).reshape(N, 2, 2)
        elif self.cu_rot is not None:
            raise ValueError("cu_rot given for a cz-mode circuit")

    @property
    def rotation_count(self):
        n, m, N = self.config.n, self.config.m, self.config.size
        count = n + m * N
        if self.config.entangler == "cu":
            count += N
        return count

    def copy(self):
        return ParamCircuit(
            self.config,
            self.init_rot.copy(),
            self.post_rot.copy(),
            None if self.cu_rot is None else self.cu_rot.copy(),
        )


def identity_circuit(config):
    n, m, N = config.n, config.m, config.size
    init = np.broadcast_to(I2, (n, 2, 2)).copy()
    post = np.broadcast_to(I2, (N, m, 2, 2)).copy()
    cu = np.broadcast_to(I2, (N, 2, 2)).copy() if config.entangler == "cu" else None
    return ParamCircuit(config, init, post, cu)


def _apply_1q_flat(flat, u, stride):
    """Apply a 2x2 operator across one bit of a flat vector (returns new)."""
    v = flat.reshape(-1, 2, stride)
    a = v[:, 0, :]
    b = v[:, 1, :]
    out = np.empty_like(v)
    out[:, 0, :] = u[0, 0] * a + u[0, 1] * b
    out[:, 1, :] = u[1, 0] * a + u[1, 1] * b
    return out.reshape(flat.shape)


def _apply_cz_flat(flat, mask):
    out = flat.copy()
    idx = np.arange(flat.size)
    out[(idx & mask) == mask] *= -1.0
    return out


def _apply_cu_flat(flat, u, cstride, tstride):
    """Apply |0><0| x I + |1><1| x u across (control, target) bits."""
    if cstride <= tstride:
        raise ValueError("control stride must exceed target stride")
    mid = cstride // (2 * tstride)
    v = flat.reshape(-1, 2, mid, 2, tstride).copy()
    a = v[:, 1, :, 0, :].copy()
    b = v[:, 1, :, 1, :].copy()
    v[:, 1, :, 0, :] = u[0, 0] * a + u[0, 1] * b
    v[:, 1, :, 1, :] = u[1, 0] * a + u[1, 1] * b
    return v.reshape(flat.shape)


def cz_mask(gate, n):
    mask = 0
    for q in gate:
        mask |= _bit_stride(q, n)
    return mask


def entangler_matrix(config, j, cu_rot=None):
    """Full 2**n matrix of the j-th entangling gate."""
    n = config.n
    gate = config.gates[j]
    if config.entangler == "cz":
        return multi_cz(n, gate)
    c, t = gate
    u = I2 if cu_rot is None else cu_rot[j]
    dim = 2**n
    flat = np.eye(dim, dtype=np.complex128).reshape(-1)
    out = _apply_cu_flat(flat, u, _bit_stride(c, n) * dim, _bit_stride(t, n) * dim)
    return out.reshape(dim, dim)


def apply_to_state(pc, psi0):
    """Propagate a state through the circuit by sequential vector updates.

    Equal to compose(pc) @ psi0 without ever forming the 2**n x 2**n matrix.
    """
    config = pc.config
    n = config.n
    psi = np.asarray(psi0, dtype=np.complex128).reshape(-1).copy()
    if psi.size != 2**n:
        raise ValueError(f"state dimension {psi.size} != 2**{n}")
    for q in range(n):
        psi = _apply_1q_flat(psi, pc.init_rot[q], _bit_stride(q, n))
    for j, gate in enumerate(config.gates):
        if config.entangler == "cz":
            psi = _apply_cz_flat(psi, cz_mask(gate, n))
        else:
            c, t = gate
            psi = _apply_cu_flat(
                psi, pc.cu_rot[j], _bit_stride(c, n), _bit_stride(t, n)
            )
        for k, q in enumerate(gate):
            psi = _apply_1q_flat(psi, pc.post_rot[j, k], _bit_stride(q, n))
    return psi


def compose(pc):
    """Full 2**n x 2**n unitary of the circuit (init layer first)."""
    config = pc.config
    n = config.n
    u = np.eye(2**n, dtype=np.complex128)
    for q in range(n):
        u = embed_single(pc.init_rot[q], q, n) @ u
    for j, gate in enumerate(config.gates):
        u = entangler_matrix(config, j, pc.cu_rot) @ u
        for k, q in enumerate(gate):
            u = embed_single(pc.post_rot[j, k], q, n) @ u
    return u


def random_su2(rng):
    """Rotation with axis-angle components uniform on [0, 2*pi)."""
    x, y, z = rng.uniform(0.0, 2.0 * np.pi, 3)
    return su2_exp(x, y, z)
