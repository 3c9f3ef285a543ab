import itertools

import numpy as np
import pytest

from qcsynth.circuits import (
    GateConfiguration,
    apply_to_state,
    compose,
    config_from_id,
    count_configs,
    depth,
    entangler_matrix,
    enumerate_configs,
    identity_circuit,
    parse_config,
    permutation_operator,
    permute,
    reverse,
)
from qcsynth.grape import init_rotations
from qcsynth.linalg import embed_single, unitarity_defect
from qcsynth.seeds import child_rng
from qcsynth.targets import multi_cz


def _random_config(rng, n, m, N, entangler="cz"):
    subsets = list(itertools.combinations(range(n), m))
    gates = tuple(subsets[rng.integers(len(subsets))] for _ in range(N))
    return GateConfiguration(n, m, gates, entangler)


# --- enumeration and ids -----------------------------------------------


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_configs(3, 2, 2)) == 9
    assert sum(1 for _ in enumerate_configs(4, 2, 3)) == 216
    assert sum(1 for _ in enumerate_configs(4, 4, 5)) == 1


def test_enumeration_count_formula():
    assert count_configs(3, 2, 14) == 4_782_969
    assert count_configs(4, 2, 6) == 46_656


def test_enumeration_matches_formula_exhaustively():
    for n in range(2, 5):
        for m in range(2, n + 1):
            for N in range(0, 9):
                total = count_configs(n, m, N)
                if total > 100_000:
                    continue
                ids = [c.config_id for c in enumerate_configs(n, m, N)]
                assert len(ids) == total
                assert ids == list(range(total))  # in order, no duplicates


def test_enumeration_large_space_count_only():
    assert sum(1 for _ in enumerate_configs(4, 2, 6)) == 46_656


def test_config_id_round_trip():
    rng = child_rng(0)
    for _ in range(30):
        c = _random_config(rng, 4, 2, 5)
        assert config_from_id(4, 2, 5, c.config_id).gates == c.gates


def test_enumeration_cap():
    with pytest.raises(ValueError):
        list(enumerate_configs(4, 2, 6, cap=1000))


def test_config_text_round_trip():
    c = GateConfiguration(3, 2, ((0, 1), (0, 1), (0, 2), (1, 2), (0, 2), (1, 2)))
    assert c.text() == "6@2: (0,1)(0,1)(0,2)(1,2)(0,2)(1,2)"
    assert parse_config(c.text()).gates == c.gates
    cu = GateConfiguration(3, 2, ((0, 2), (1, 2)), "cu")
    assert parse_config("2@cu: (0,2)(1,2)").gates == cu.gates
    assert parse_config(cu.text()).entangler == "cu"


def test_config_validation():
    with pytest.raises(ValueError):
        GateConfiguration(3, 2, ((0, 0),))
    with pytest.raises(ValueError):
        GateConfiguration(3, 2, ((0, 3),))
    with pytest.raises(ValueError):
        GateConfiguration(3, 3, ((0, 1, 2),), "cu")


# --- composition --------------------------------------------------------


def test_compose_empty_identity():
    c = GateConfiguration(3, 2, ())
    assert np.array_equal(compose(identity_circuit(c)), np.eye(8))


def test_compose_bare_cz():
    c = GateConfiguration(3, 2, ((0, 2),))
    assert np.array_equal(compose(identity_circuit(c)), multi_cz(3, (0, 2)))


def test_compose_matches_column_propagation():
    # column-by-column state propagation oracle
    rng = child_rng(1)
    for entangler in ("cz", "cu"):
        c = _random_config(rng, 3, 2, 4, entangler)
        pc = init_rotations(c, rng)
        u = compose(pc)
        eye = np.eye(8, dtype=complex)
        cols = np.stack([apply_to_state(pc, eye[:, k]) for k in range(8)], axis=1)
        assert np.abs(u - cols).max() < 1e-12


def test_compose_is_unitary():
    rng = child_rng(2)
    for _ in range(5):
        c = _random_config(rng, 4, 2, 6)
        pc = init_rotations(c, rng)
        assert unitarity_defect(compose(pc)) < 1e-10


def test_apply_to_state_identity_circuit():
    c = GateConfiguration(2, 2, ())
    psi = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
    assert np.array_equal(apply_to_state(identity_circuit(c), psi), psi)


def test_apply_to_state_norm_preserved():
    rng = child_rng(3)
    c = _random_config(rng, 4, 3, 4)
    pc = init_rotations(c, rng)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    out = apply_to_state(pc, psi)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_cu_entangler_block_structure():
    c = GateConfiguration(2, 2, ((0, 1),), "cu")
    pc = init_rotations(c, child_rng(4))
    v = entangler_matrix(c, 0, pc.cu_rot)
    expect = np.eye(4, dtype=complex)
    expect[2:, 2:] = pc.cu_rot[0]
    assert np.abs(v - expect).max() < 1e-15


# --- depth ---------------------------------------------------------------


def test_depth_worked_example():
    # two adjacent disjoint pairs share a layer, giving depth 4 for this size-6 list
    c = GateConfiguration(4, 2, ((0, 1), (0, 2), (1, 3), (0, 1), (0, 1), (2, 3)))
    assert depth(c) == 4


def test_depth_serial_chain():
    for N in (1, 3, 7):
        c = GateConfiguration(2, 2, tuple([(0, 1)] * N))
        assert depth(c) == N


def test_depth_three_qubits_always_serial():
    # any two pairs out of three qubits overlap, so depth always equals size
    rng = child_rng(5)
    for _ in range(20):
        c = _random_config(rng, 3, 2, 6)
        assert depth(c) == 6


def test_depth_bounds():
    rng = child_rng(6)
    for _ in range(50):
        n, m = 4, int(rng.integers(2, 5))
        N = int(rng.integers(1, 8))
        c = _random_config(rng, n, m, N)
        d = depth(c)
        assert d <= N
        assert d >= -(-N * m // n)


def _depth_reference(gates, n):
    # independent ASAP oracle: explicit per-layer qubit occupancy sets
    layers = []
    for g in gates:
        placed = False
        start = len(layers)
        for i in reversed(range(len(layers))):
            if layers[i] & set(g):
                start = i + 1
                break
        else:
            start = 0
        if start < len(layers):
            layers[start] |= set(g)
            placed = True
        if not placed:
            layers.append(set(g))
    return len(layers)


def test_reverse_preserves_depth():
    rng = child_rng(7)
    for _ in range(30):
        c = _random_config(rng, 4, 2, 6)
        r = reverse(c)
        assert r.gates == tuple(reversed(c.gates))
        assert depth(r) == _depth_reference(r.gates, 4)
        assert depth(c) == _depth_reference(c.gates, 4)


# --- permutation and reversal -------------------------------------------


def test_permute_identity():
    c = GateConfiguration(4, 2, ((0, 1), (2, 3)))
    assert permute(c, (0, 1, 2, 3)) == c


def test_permute_involution():
    rng = child_rng(8)
    for _ in range(20):
        c = _random_config(rng, 4, 2, 5)
        perm = tuple(rng.permutation(4))
        inv = tuple(np.argsort(perm))
        assert permute(permute(c, perm), inv) == c


def test_orbit_size_divides_group_order():
    rng = child_rng(9)
    for _ in range(10):
        c = _random_config(rng, 4, 2, 4)
        orbit = {permute(c, p).config_id for p in itertools.permutations(range(4))}
        assert 24 % len(orbit) == 0


def test_reverse_involution():
    rng = child_rng(10)
    c = _random_config(rng, 3, 2, 5)
    assert reverse(reverse(c)) == c
    pal = GateConfiguration(3, 2, ((0, 1), (1, 2), (0, 1)))
    assert reverse(pal) == pal


def test_permutation_operator_embeds_correctly():
    rng = child_rng(11)
    n = 3
    op = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    for perm in itertools.permutations(range(n)):
        p = permutation_operator(perm, n)
        for q in range(n):
            lhs = p @ embed_single(op, q, n) @ p.conj().T
            rhs = embed_single(op, perm[q], n)
            assert np.abs(lhs - rhs).max() < 1e-12
