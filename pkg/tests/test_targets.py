import numpy as np
import pytest

from qcsynth.linalg import embed_single, SZ, unitarity_defect
from qcsynth.seeds import child_rng
from qcsynth.targets import (
    TargetSpec,
    debias,
    load_target,
    multi_cz,
    random_state,
    random_target,
    random_unitary,
    save_target,
    state_fidelity,
    toffoli,
    unitary_fidelity,
)


def test_random_state_normalized():
    psi = random_state(4, child_rng(0))
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_random_state_deterministic():
    a = random_state(3, child_rng(42))
    b = random_state(3, child_rng(42))
    assert np.array_equal(a, b)


def test_random_states_differ_across_seeds():
    # different seeds overlap weakly with overwhelming probability
    for s in range(100):
        a = random_state(4, child_rng(s))
        b = random_state(4, child_rng(s + 1000))
        assert state_fidelity(a, b) < 0.99


def test_random_unitary_is_unitary():
    for n in (1, 2, 3):
        u = random_unitary(n, child_rng(7))
        assert unitarity_defect(u) < 1e-12
        assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-10


def test_random_unitary_column_shuffle_preserves_gram():
    u = random_unitary(2, child_rng(9))
    assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12


def test_random_unitary_trace_statistic_near_haar():
    # coarse sanity only: mean |Tr U / 4|^2 within a factor 3 of 1/16
    vals = [abs(np.trace(random_unitary(2, child_rng(s))) / 4) ** 2 for s in range(1000)]
    mean = np.mean(vals)
    assert 1 / 48 < mean < 3 / 16


def test_debias_preserves_norm_and_unitarity():
    rng = child_rng(1)
    st = TargetSpec("state", 3, random_state(3, rng), "raw")
    st2 = debias(st, rng)
    assert abs(np.linalg.norm(st2.payload) - 1.0) < 1e-12
    un = TargetSpec("unitary", 2, random_unitary(2, rng), "raw")
    un2 = debias(un, rng)
    assert unitarity_defect(un2.payload) < 1e-12


def test_debias_deterministic():
    a = random_target("state", 3, 5)
    b = random_target("state", 3, 5)
    assert np.array_equal(a.payload, b.payload)


def test_multi_cz_two_qubit():
    assert np.array_equal(multi_cz(2, (0, 1)), np.diag([1.0, 1.0, 1.0, -1.0]))


def test_multi_cz_three_qubit():
    assert np.array_equal(
        multi_cz(3, (0, 1, 2)), np.diag([1.0] * 7 + [-1.0])
    )


def test_multi_cz_squares_to_identity():
    u = multi_cz(4, (1, 3))
    assert np.array_equal(u @ u, np.eye(16))


def test_multi_cz_subset_order_irrelevant():
    assert np.array_equal(multi_cz(3, (2, 0)), multi_cz(3, (0, 2)))


def test_multi_cz_validation():
    with pytest.raises(ValueError):
        multi_cz(3, (1,))
    with pytest.raises(ValueError):
        multi_cz(2, (0, 2))


def test_toffoli_action_on_basis_states():
    u = toffoli(3)
    e = np.eye(8)
    assert np.array_equal(u @ e[6], e[7])  # |110> -> |111>
    assert np.array_equal(u @ e[7], e[6])
    assert np.array_equal(u @ e[4], e[4])  # |100> fixed


def test_toffoli_squares_to_identity():
    for n in (3, 4):
        u = toffoli(n)
        assert np.array_equal(u @ u, np.eye(2**n))


def test_toffoli_needs_three_qubits():
    with pytest.raises(ValueError):
        toffoli(2)


def test_toffoli_is_hadamard_conjugated_multi_cz():
    # direct matrix comparison: CZ on all qubits conjugated by H on the target
    for n in (3, 4):
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        hn = embed_single(h, n - 1, n)
        assert np.abs(hn @ multi_cz(n, range(n)) @ hn - toffoli(n)).max() < 1e-12


def test_state_fidelity_basic():
    psi = random_state(3, child_rng(2))
    assert state_fidelity(psi, psi) == pytest.approx(1.0)
    e = np.eye(8)
    assert state_fidelity(e[0], e[5]) == 0.0
    assert state_fidelity(np.exp(0.7j) * psi, psi) == pytest.approx(1.0)


def test_unitary_fidelity_basic():
    u = random_unitary(3, child_rng(3))
    assert unitary_fidelity(u, u) == pytest.approx(1.0)
    assert unitary_fidelity(np.exp(1.2j) * u, u) == pytest.approx(1.0)
    # traceless difference: Z on one qubit vs identity
    assert unitary_fidelity(np.eye(8), embed_single(SZ, 0, 3)) == pytest.approx(0.0)


def test_fidelities_symmetric_and_bounded():
    rng = child_rng(4)
    for _ in range(20):
        a = random_state(3, rng)
        b = random_state(3, rng)
        fab, fba = state_fidelity(a, b), state_fidelity(b, a)
        assert fab == pytest.approx(fba)
        assert -1e-12 <= fab <= 1 + 1e-12
        ua = random_unitary(2, rng)
        ub = random_unitary(2, rng)
        uab, uba = unitary_fidelity(ua, ub), unitary_fidelity(ub, ua)
        assert uab == pytest.approx(uba)
        assert -1e-12 <= uab <= 1 + 1e-12


def test_multi_cz_commutes_with_diagonals():
    rng = child_rng(6)
    d = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 8)))
    cz = multi_cz(3, (0, 2))
    assert np.abs(cz @ d - d @ cz).max() < 1e-12


def test_target_file_round_trip(tmp_path):
    for spec in (random_target("state", 3, 8), random_target("unitary", 2, 9)):
        path = tmp_path / "t.json"
        save_target(spec, path)
        back = load_target(path)
        assert back.kind == spec.kind
        assert back.n == spec.n
        assert np.array_equal(back.payload, spec.payload)  # exact at double precision
