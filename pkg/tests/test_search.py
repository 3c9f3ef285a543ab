import numpy as np
import pytest

from qcsynth.grape import OptimizerSettings
from qcsynth.search import (
    CHECKPOINT_FILE,
    RECORDS_FILE,
    ResultStore,
    SearchJob,
    SearchRecord,
    fidelity_vs_N,
    load_job,
    permutation_closure,
    read_checkpoint,
    refine,
    run_search,
    standard_target,
    stores_identical,
)
from qcsynth.targets import random_target, toffoli_target


def _small_job(seed=5, iters=300, restarts=1, N=2):
    settings = OptimizerSettings(max_iterations=iters, seed=seed)
    return SearchJob(toffoli_target(3), 3, 2, N, settings=settings, restarts=restarts)


def test_record_json_round_trip():
    rec = SearchRecord(7, "2@2: (0,1)(1,2)", 0.12345678901234567, 300, 2, 9, 0.5, "initial")
    back = SearchRecord.from_json(rec.to_json())
    assert back.fidelity == rec.fidelity  # bit-exact via 17 significant digits
    assert back.fingerprint() == rec.fingerprint()


def test_run_search_record_count_and_ids():
    store = run_search(_small_job())
    recs = store.effective_records()
    assert len(recs) == 9
    assert [r.config_id for r in recs] == list(range(9))
    assert all(0.0 <= r.fidelity <= 1.0 + 1e-12 for r in recs)
    assert all(r.stage == "initial" for r in recs)


def test_run_search_larger_count():
    job = SearchJob(
        random_target("state", 3, 3),
        3,
        2,
        3,
        settings=OptimizerSettings(max_iterations=50, seed=1),
    )
    assert len(run_search(job)) == 27


def test_worker_count_invariance():
    a = run_search(_small_job())
    b = run_search(_small_job(), workers=2)
    assert stores_identical(a, b)


def test_rerun_reproduces_store(tmp_path):
    job = _small_job()
    a = run_search(job, out_dir=tmp_path / "a")
    b = run_search(_small_job(), out_dir=tmp_path / "b")
    assert stores_identical(a, b)
    reloaded = ResultStore.open(tmp_path / "a")
    assert stores_identical(a, reloaded)


def test_resume_after_partial_run(tmp_path):
    # full reference run
    full_dir = tmp_path / "full"
    full = run_search(_small_job(), out_dir=full_dir)
    # simulate a run killed after 4 configurations: truncate log + checkpoint
    part_dir = tmp_path / "part"
    part_dir.mkdir()
    lines = (full_dir / RECORDS_FILE).read_text().splitlines()[:4]
    (part_dir / RECORDS_FILE).write_text("\n".join(lines) + "\n")
    blob = (full_dir / CHECKPOINT_FILE).read_bytes()
    (part_dir / CHECKPOINT_FILE).write_bytes(blob[: 8 + 4 * 16])
    resumed = run_search(_small_job(), out_dir=part_dir, resume=True)
    assert stores_identical(full, resumed)
    # bit-for-bit fidelities
    assert [r.fidelity for r in resumed.effective_records()] == [
        r.fidelity for r in full.effective_records()
    ]


def test_checkpoint_round_trip(tmp_path):
    run_search(_small_job(), out_dir=tmp_path)
    done = read_checkpoint(tmp_path)
    assert done == {(0, cid) for cid in range(9)}


def test_manifest_round_trip(tmp_path):
    job = _small_job()
    run_search(job, out_dir=tmp_path)
    back = load_job(tmp_path)
    assert back.n == job.n and back.m == job.m and back.N == job.N
    assert back.settings == job.settings
    assert np.array_equal(back.target.payload, job.target.payload)
    rerun = run_search(back, out_dir=tmp_path / "again")
    assert stores_identical(rerun, ResultStore.open(tmp_path))


def test_refine_updates_only_improvements():
    job = _small_job(iters=100)
    store = run_search(job)
    before = {r.config_id: r.fidelity for r in store.effective_records()}
    refine(job, store, fidelity_floor=0.5, settings=OptimizerSettings(max_iterations=2000, seed=5), restarts=2)
    after = {r.config_id: r.fidelity for r in store.effective_records()}
    assert all(after[cid] >= before[cid] for cid in before)


def test_refine_impossible_floor_touches_nothing():
    job = _small_job()
    store = run_search(job)
    fp = store.fingerprint()
    refine(job, store, fidelity_floor=1.1)
    assert store.fingerprint() == fp


def test_closure_assigns_orbit_maximum():
    job = _small_job(N=1, iters=400)  # 3 configs, all equivalent by relabeling
    store = run_search(job)
    best = max(r.fidelity for r in store.effective_records())
    tol = 1.0 - best + 1e-9  # force qualification at the observed maximum
    permutation_closure(job, store, tol=tol)
    closed = store.stage_records("closure-assigned")
    assert len(closed) == 3
    assert all(r.fidelity == best for r in closed.values())


def test_closure_ignores_low_fidelity_orbits():
    job = _small_job(N=1, iters=30)
    store = run_search(job)
    fp = store.fingerprint()
    permutation_closure(job, store, tol=1e-9)  # nothing is that good at N=1
    assert store.fingerprint() == fp


def test_fidelity_vs_N_two_qubits():
    target = random_target("state", 2, 17)
    settings = OptimizerSettings(max_iterations=2000, seed=2)
    series = fidelity_vs_N(target, 2, 2, [0, 1], settings, restarts=3)
    assert series[0]["fidelity"] < 1 - 1e-4  # product circuit misses entangled target
    assert series[1]["fidelity"] > 1 - 1e-10


def test_sweep_max_monotone_in_N():
    target = random_target("state", 3, 23)
    settings = OptimizerSettings(max_iterations=400, seed=3)
    series = fidelity_vs_N(target, 3, 2, [0, 1, 2], settings, restarts=2)
    fids = [p["fidelity"] for p in series]
    assert fids[0] <= fids[1] + 1e-3
    assert fids[1] <= fids[2] + 1e-3


def test_standard_target_names(tmp_path):
    assert standard_target("toffoli3").n == 3
    assert standard_target("random-state", n=2, seed=4).kind == "state"
    with pytest.raises(ValueError):
        standard_target("nonsense")


def test_job_validates_cap():
    with pytest.raises(ValueError):
        SearchJob(toffoli_target(3), 3, 2, 14, config_cap=1000)


def test_job_validates_target_size():
    with pytest.raises(ValueError):
        SearchJob(toffoli_target(3), 4, 2, 2)
