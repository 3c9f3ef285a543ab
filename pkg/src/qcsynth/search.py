"""Exhaustive configuration sweeps with deterministic parallelism.

A search job optimizes every configuration of a (n, m, N) space against one
target. Per-configuration seeds are derived from the job seed and the
configuration id, so the stored fidelities are a pure function of the job
description: worker count, scheduling order and resume points cannot change
them.

The result store is an append-only JSONL log plus a binary checkpoint of
completed ids. Replaying the log merges records by maximum fidelity, so a
crash between the record write and the checkpoint write costs at most one
recomputation. Refinement and permutation closure append records under their
own stage tags and never decrease a stored fidelity.
"""

from __future__ import annotations

import json
import os
import struct
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .circuits import (
    config_from_id,
    count_configs,
    orbit_of_id,
    subset_permutation_maps,
)
from .grape import OptimizerSettings, multi_restart
from .targets import TargetSpec, load_target, random_target, save_target, toffoli_target

CHECKPOINT_MAGIC = b"QSYCHK01"
STAGES = ("initial", "refined", "closure-assigned")
STAGE_RANK = {s: i for i, s in enumerate(STAGES)}
RECORDS_FILE = "records.jsonl"
CHECKPOINT_FILE = "checkpoint.bin"
MANIFEST_FILE = "manifest.json"
TARGET_FILE = "target.json"
DEFAULT_CONFIG_CAP = 10_000_000


@dataclass
class SearchJob:
    target: TargetSpec
    n: int
    m: int
    N: int
    entangler: str = "cz"
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)
    restarts: int = 1
    instance_id: int = 0
    config_cap: int = DEFAULT_CONFIG_CAP

    def __post_init__(self):
        if self.target.n != self.n:
            raise ValueError("target and job disagree on qubit count")
        total = count_configs(self.n, self.m, self.N)
        if total > self.config_cap:
            raise ValueError(
                f"{total} configurations exceed the job cap of {self.config_cap}"
            )

    @property
    def total_configs(self):
        return count_configs(self.n, self.m, self.N)


@dataclass
class SearchRecord:
    config_id: int
    config_text: str
    fidelity: float
    iterations: int
    restarts: int
    seed: int
    wall_time: float
    stage: str

    def to_json(self):
        # fidelity as a 17-significant-digit decimal string: exact double
        # round-trip, bit-identical across writers
        return json.dumps(
            {
                "config_id": self.config_id,
                "config": self.config_text,
                "fidelity": f"{self.fidelity:.17g}",
                "iterations": self.iterations,
                "restarts": self.restarts,
                "seed": self.seed,
                "wall_time": round(self.wall_time, 6),
                "stage": self.stage,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line):
        d = json.loads(line)
        return cls(
            config_id=int(d["config_id"]),
            config_text=d["config"],
            fidelity=float(d["fidelity"]),
            iterations=int(d["iterations"]),
            restarts=int(d["restarts"]),
            seed=int(d["seed"]),
            wall_time=float(d["wall_time"]),
            stage=d["stage"],
        )

    def fingerprint(self):
        # wall_time is timing noise, never part of store identity
        return (
            self.stage,
            self.config_id,
            self.fidelity.hex(),
            self.iterations,
            self.restarts,
            self.seed,
            self.config_text,
        )


class ResultStore:
    """Merged view of the record log, optionally attached to a directory."""

    def __init__(self, directory=None):
        self._by_stage = {s: {} for s in STAGES}
        self._dir = Path(directory) if directory is not None else None
        self._records_fh = None

    # -- persistence ------------------------------------------------------

    @classmethod
    def open(cls, directory):
        store = cls(directory)
        path = store._dir / RECORDS_FILE
        if path.exists():
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        store._merge(SearchRecord.from_json(line))
        return store

    def _records_file(self):
        if self._records_fh is None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._records_fh = open(self._dir / RECORDS_FILE, "a")
        return self._records_fh

    def close(self):
        if self._records_fh is not None:
            self._records_fh.close()
            self._records_fh = None

    # -- record handling ----------------------------------------------------

    def _merge(self, record):
        if record.stage not in STAGE_RANK:
            raise ValueError(f"unknown stage {record.stage!r}")
        stage = self._by_stage[record.stage]
        old = stage.get(record.config_id)
        if old is None or record.fidelity > old.fidelity:
            stage[record.config_id] = record

    def append(self, record):
        self._merge(record)
        if self._dir is not None:
            fh = self._records_file()
            fh.write(record.to_json() + "\n")
            fh.flush()

    def stage_records(self, stage):
        return self._by_stage[stage]

    def completed_ids(self, stage="initial"):
        return set(self._by_stage[stage])

    def effective(self):
        """Best record per configuration: highest fidelity, later stage on ties."""
        best = {}
        for stage in STAGES:
            for cid, rec in self._by_stage[stage].items():
                cur = best.get(cid)
                if (
                    cur is None
                    or rec.fidelity > cur.fidelity
                    or (
                        rec.fidelity == cur.fidelity
                        and STAGE_RANK[rec.stage] > STAGE_RANK[cur.stage]
                    )
                ):
                    best[cid] = rec
        return best

    def effective_records(self):
        best = self.effective()
        return [best[cid] for cid in sorted(best)]

    def fidelities(self):
        return np.array([r.fidelity for r in self.effective_records()])

    def fingerprint(self):
        lines = []
        for stage in STAGES:
            for cid in sorted(self._by_stage[stage]):
                lines.append(self._by_stage[stage][cid].fingerprint())
        return tuple(lines)

    def __len__(self):
        return len(self.effective())


def stores_identical(a, b):
    """Record-identical up to wall-clock noise and log order."""
    return a.fingerprint() == b.fingerprint()


# --- checkpointing -----------------------------------------------------


def _checkpoint_path(directory):
    return Path(directory) / CHECKPOINT_FILE


def read_checkpoint(directory):
    """Completed (stage_index, config_id) pairs, or empty if no checkpoint."""
    path = _checkpoint_path(directory)
    done = set()
    if not path.exists():
        return done
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint header in {path}")
        while True:
            blob = fh.read(16)
            if len(blob) < 16:
                break
            done.add(struct.unpack("<QQ", blob))
    return done


class _CheckpointWriter:
    def __init__(self, directory):
        path = _checkpoint_path(directory)
        fresh = not path.exists()
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(path, "ab")
        if fresh:
            self._fh.write(CHECKPOINT_MAGIC)
            self._fh.flush()

    def mark(self, stage_idx, config_id):
        self._fh.write(struct.pack("<QQ", stage_idx, config_id))
        self._fh.flush()

    def close(self):
        self._fh.close()


# --- manifests ------------------------------------------------------------


def job_manifest(job, command, workers, extra=None):
    from . import __version__

    settings = job.settings
    data = {
        "command": command,
        "package_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "target": {"kind": job.target.kind, "n": job.target.n, "source": job.target.source},
        "n": job.n,
        "m": job.m,
        "N": job.N,
        "entangler": job.entangler,
        "restarts": job.restarts,
        "instance_id": job.instance_id,
        "settings": {
            "max_iterations": settings.max_iterations,
            "step_size": settings.step_size,
            "adaptive": settings.adaptive,
            "stop_infidelity": settings.stop_infidelity,
            "seed": settings.seed,
            "reunit_every": settings.reunit_every,
            "engine": settings.engine,
        },
        "workers": workers,
    }
    if extra:
        data.update(extra)
    return data


def write_manifest(directory, manifest):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / MANIFEST_FILE, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def append_manifest_event(directory, event):
    """Record a follow-up command (refine, closure) in the store manifest."""
    path = Path(directory) / MANIFEST_FILE
    with open(path) as fh:
        man = json.load(fh)
    man.setdefault("history", []).append(event)
    write_manifest(directory, man)


def load_job(directory, settings_override=None):
    """Rebuild a SearchJob from a store directory's manifest and target file."""
    directory = Path(directory)
    with open(directory / MANIFEST_FILE) as fh:
        man = json.load(fh)
    target = load_target(directory / TARGET_FILE)
    s = man["settings"]
    settings = OptimizerSettings(
        max_iterations=s["max_iterations"],
        step_size=s["step_size"],
        adaptive=s["adaptive"],
        stop_infidelity=s["stop_infidelity"],
        seed=s["seed"],
        reunit_every=s["reunit_every"],
        engine=s["engine"],
    )
    if settings_override is not None:
        settings = settings_override
    return SearchJob(
        target=target,
        n=man["n"],
        m=man["m"],
        N=man["N"],
        entangler=man["entangler"],
        settings=settings,
        restarts=man["restarts"],
        instance_id=man["instance_id"],
    )


# --- sweep execution -------------------------------------------------------


def _optimize_one(job, config_id, stage_idx, settings, restarts):
    t0 = time.perf_counter()
    config = config_from_id(job.n, job.m, job.N, config_id, job.entangler)
    res = multi_restart(
        config,
        job.target,
        settings,
        restarts=restarts,
        seed_key=(stage_idx, config_id),
    )
    return SearchRecord(
        config_id=config_id,
        config_text=config.text(),
        fidelity=res.final_fidelity,
        iterations=res.iterations_used,
        restarts=res.restarts_used,
        seed=settings.seed,
        wall_time=time.perf_counter() - t0,
        stage=STAGES[min(stage_idx, 1)],
    )


def _chunk_worker(args):
    job, ids, stage_idx, settings, restarts = args
    return [_optimize_one(job, cid, stage_idx, settings, restarts) for cid in ids]


def _run_ids(job, ids, stage_idx, settings, restarts, workers, on_record):
    if not ids:
        return
    if workers <= 1:
        for cid in ids:
            on_record(_optimize_one(job, cid, stage_idx, settings, restarts))
        return
    from . import _kernels

    if settings.engine != "reference":
        _kernels.warmup()  # compile before forking so children reuse the JIT
    chunk = max(1, min(500, len(ids) // (workers * 8) or 1))
    chunks = [ids[i : i + chunk] for i in range(0, len(ids), chunk)]
    ctx = get_context("fork")
    with ctx.Pool(workers) as pool:
        tasks = [(job, c, stage_idx, settings, restarts) for c in chunks]
        for records in pool.imap_unordered(_chunk_worker, tasks):
            for rec in records:
                on_record(rec)


def _check_resume_compatible(out_dir, job):
    path = Path(out_dir) / MANIFEST_FILE
    if not path.exists():
        return
    with open(path) as fh:
        old = json.load(fh)
    fresh = job_manifest(job, "search", workers=0)
    for key in ("n", "m", "N", "entangler", "restarts", "instance_id", "settings", "target"):
        if old.get(key) != fresh[key]:
            raise ValueError(
                f"store at {out_dir} was built by a different job "
                f"({key}: {old.get(key)!r} vs {fresh[key]!r}); "
                "use a fresh directory or resume=False"
            )


def run_search(job, out_dir=None, workers=1, resume=True):
    """One initial-stage record per configuration; resumable and repeatable."""
    if out_dir is not None:
        out_dir = Path(out_dir)
        if resume and (out_dir / RECORDS_FILE).exists():
            _check_resume_compatible(out_dir, job)
            store = ResultStore.open(out_dir)
        else:
            if (out_dir / RECORDS_FILE).exists():
                (out_dir / RECORDS_FILE).unlink()
            if _checkpoint_path(out_dir).exists():
                _checkpoint_path(out_dir).unlink()
            store = ResultStore(out_dir)
            write_manifest(out_dir, job_manifest(job, "search", workers))
            save_target(job.target, out_dir / TARGET_FILE)
        if not (out_dir / MANIFEST_FILE).exists():
            write_manifest(out_dir, job_manifest(job, "search", workers))
            save_target(job.target, out_dir / TARGET_FILE)
        done = {cid for s, cid in read_checkpoint(out_dir) if s == 0} if resume else set()
        ckpt = _CheckpointWriter(out_dir)
    else:
        store = ResultStore()
        done = set()
        ckpt = None

    todo = [cid for cid in range(job.total_configs) if cid not in done]

    def on_record(rec):
        store.append(rec)
        if ckpt is not None:
            ckpt.mark(0, rec.config_id)

    try:
        _run_ids(job, todo, 0, job.settings, job.restarts, workers, on_record)
    finally:
        if ckpt is not None:
            ckpt.close()
        store.close()
    return store


def refine(job, store, fidelity_floor, settings=None, restarts=5, workers=1, pass_index=1):
    """Re-optimize configurations above the floor; keep only improvements.

    Each pass uses fresh seeds derived from (seed, pass_index, config_id).
    Repeated passes with increasing pass_index are allowed and cheap for
    already-converged records (the optimizer exits at its stop infidelity).
    """
    if settings is None:
        settings = replace(job.settings, max_iterations=10_000)
    best = store.effective()
    ids = [cid for cid, rec in best.items() if rec.fidelity > fidelity_floor]

    def on_record(rec):
        if rec.fidelity > best[rec.config_id].fidelity:
            store.append(rec)

    _run_ids(job, ids, pass_index, settings, restarts, workers, on_record)
    return store


def permutation_closure(job, store, tol=1e-6):
    """Assign each orbit's maximum fidelity to all members when it is perfect.

    Orbits are the qubit-relabeling classes. When the best member reaches
    1 - tol, every member present in the store receives that fidelity under
    the closure-assigned stage.
    """
    maps = subset_permutation_maps(job.n, job.m)
    best = store.effective()
    seen = set()
    for cid in sorted(best):
        if cid in seen:
            continue
        orbit = orbit_of_id(cid, job.n, job.m, job.N, maps)
        seen |= orbit
        members = [c for c in orbit if c in best]
        top = max(members, key=lambda c: best[c].fidelity)
        top_rec = best[top]
        if top_rec.fidelity >= 1.0 - tol:
            for c in members:
                store.append(
                    SearchRecord(
                        config_id=c,
                        config_text=best[c].config_text,
                        fidelity=top_rec.fidelity,
                        iterations=top_rec.iterations,
                        restarts=top_rec.restarts,
                        seed=top_rec.seed,
                        wall_time=0.0,
                        stage="closure-assigned",
                    )
                )
    return store


def sweep_max(target, n, m, N, settings, restarts=1, workers=1, entangler="cz"):
    """Maximum fidelity over every configuration of one space."""
    job = SearchJob(target, n, m, N, entangler, settings, restarts)
    store = run_search(job, workers=workers)
    fids = store.fidelities()
    return float(fids.max())


def fidelity_vs_N(targets, n, m, N_values, settings, restarts=1, workers=1, entangler="cz"):
    """Best-achievable-fidelity series in the circuit size N.

    targets may be one TargetSpec or a list of instances; with several
    instances each point reports the minimum over instances of the per-target
    maximum, plus the per-instance values.
    """
    if isinstance(targets, TargetSpec):
        targets = [targets]
    series = []
    for N in N_values:
        per_instance = [
            sweep_max(t, n, m, N, settings, restarts, workers, entangler)
            for t in targets
        ]
        series.append(
            {
                "N": int(N),
                "fidelity": min(per_instance),
                "per_instance": per_instance,
            }
        )
    return series


def standard_target(name, n=None, seed=0):
    """Targets addressable by name: toffoliK, random-state, random-unitary."""
    if name.startswith("toffoli"):
        k = int(name[len("toffoli") :])
        return toffoli_target(k)
    if name == "random-state":
        return random_target("state", n, seed)
    if name == "random-unitary":
        return random_target("unitary", n, seed)
    if os.path.exists(name):
        return load_target(name)
    raise ValueError(f"unknown target {name!r}")
