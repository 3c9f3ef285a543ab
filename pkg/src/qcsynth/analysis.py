"""Statistics over completed result stores.

Everything here is read-only over a store: fidelity histograms, the set of
perfect configurations, depth distributions, per-pair gate usage and
equivalence classes under qubit relabeling and time reversal. CSV emission
for the plotting scripts lives here too; the column layouts below are the
file contract.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import numpy as np

from .circuits import (
    config_from_id,
    depth,
    orbit_of_id,
    subset_permutation_maps,
)

HISTOGRAM_HEADER = ["bin_low", "bin_high", "count"]
DEPTH_HEADER = ["depth", "count"]
ORBIT_HEADER = ["class", "representative", "size"]
SERIES_HEADER = ["label", "N", "fidelity"]
BOUNDS_HEADER = ["task", "n", "m", "N", "circuit_params", "target_params"]

INFIDELITY_CLAMP = 1e-12


@dataclass
class HistogramSpec:
    binning: str  # "log" over 1-F or "linear" over F
    edges: np.ndarray
    counts: np.ndarray = None

    @classmethod
    def log_infidelity(cls, decades=12):
        # one decade per bin from the clamp value up to 1
        return cls("log", np.logspace(-decades, 0, decades + 1))

    @classmethod
    def linear_fidelity(cls, bins=50):
        return cls("linear", np.linspace(0.0, 1.0, bins + 1))


def histogram(store, spec=None, stage=None):
    """Fill a histogram over the store's fidelities.

    Log binning histograms the infidelity 1-F, clamping anything below the
    smallest edge into the first bin (the "perfect" bin). Counts always sum
    to the number of records.
    """
    if spec is None:
        spec = HistogramSpec.log_infidelity()
    if stage is None:
        records = store.effective_records()
    else:
        records = list(store.stage_records(stage).values())
    if not records:
        raise ValueError("empty store")
    fids = np.array([r.fidelity for r in records])
    edges = np.asarray(spec.edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    values = 1.0 - fids if spec.binning == "log" else fids
    idx = np.searchsorted(edges, values, side="right") - 1
    idx = np.clip(idx, 0, len(edges) - 2)  # clamp both tails into end bins
    counts = np.bincount(idx, minlength=len(edges) - 1)
    return HistogramSpec(spec.binning, edges, counts)


@dataclass
class PerfectSet:
    tol: float
    n: int
    m: int
    N: int
    entangler: str
    config_ids: list = field(repr=False)
    total: int = 0

    @property
    def count(self):
        return len(self.config_ids)

    @property
    def fraction(self):
        return self.count / self.total if self.total else 0.0

    def configs(self):
        return [
            config_from_id(self.n, self.m, self.N, cid, self.entangler)
            for cid in self.config_ids
        ]


def perfect_set(store, job, tol=1e-12):
    """Configurations whose stored fidelity reaches 1 - tol."""
    best = store.effective()
    ids = sorted(cid for cid, rec in best.items() if rec.fidelity >= 1.0 - tol)
    return PerfectSet(tol, job.n, job.m, job.N, job.entangler, ids, len(best))


def depth_distribution(ps):
    """Depth counts over a perfect set."""
    if not ps.config_ids:
        raise ValueError("empty perfect set")
    out = {}
    for cfg in ps.configs():
        d = depth(cfg)
        out[d] = out.get(d, 0) + 1
    return dict(sorted(out.items()))


def pair_usage(config):
    """Gate count per qubit pair, plus the pairs never used."""
    if config.m != 2:
        raise ValueError("pair usage is defined for two-qubit entanglers")
    counts = {}
    for g in config.gates:
        counts[g] = counts.get(g, 0) + 1
    unused = [
        (a, b)
        for a in range(config.n)
        for b in range(a + 1, config.n)
        if (a, b) not in counts
    ]
    return dict(sorted(counts.items())), unused


@dataclass
class OrbitReport:
    permutation_classes: int
    reversal_classes: int
    orbits: list = field(repr=False)


def orbit_report(ps, merge_reversal=False):
    """Equivalence classes of a perfect set under qubit relabeling.

    With merge_reversal, classes whose members are each other's time
    reversals merge; this is meaningful only for self-inverse targets, which
    the caller is responsible for checking.
    """
    if not ps.config_ids:
        raise ValueError("empty perfect set")
    maps = subset_permutation_maps(ps.n, ps.m)
    members = set(ps.config_ids)
    orbits = []
    seen = set()
    for cid in ps.config_ids:
        if cid in seen:
            continue
        orbit = orbit_of_id(cid, ps.n, ps.m, ps.N, maps) & members
        seen |= orbit
        orbits.append(tuple(sorted(orbit)))
    perm_count = len(orbits)
    rev_count = perm_count
    if merge_reversal:
        merged = []
        consumed = set()
        for orbit in orbits:
            if orbit in consumed:
                continue
            closure = orbit_of_id(
                orbit[0], ps.n, ps.m, ps.N, maps, include_reversal=True
            ) & members
            group = [o for o in orbits if set(o) <= closure]
            for o in group:
                consumed.add(o)
            merged.append(tuple(sorted(set().union(*map(set, group)))))
        rev_count = len(merged)
    return OrbitReport(perm_count, rev_count, orbits)


def target_self_inverse(target):
    """Whether the target unitary squares to the identity (numerically)."""
    if target.kind != "unitary":
        return False
    u = target.payload
    return bool(np.abs(u @ u - np.eye(u.shape[0])).max() < 1e-10)


# --- CSV emission ---------------------------------------------------------


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_histogram_csv(spec, path):
    rows = [
        (f"{spec.edges[i]:.17g}", f"{spec.edges[i + 1]:.17g}", int(spec.counts[i]))
        for i in range(len(spec.counts))
    ]
    _write_rows(path, HISTOGRAM_HEADER, rows)


def write_depth_csv(dist, path):
    _write_rows(path, DEPTH_HEADER, sorted(dist.items()))


def write_orbit_csv(report, path):
    rows = [
        (i, orbit[0], len(orbit)) for i, orbit in enumerate(report.orbits)
    ]
    _write_rows(path, ORBIT_HEADER, rows)


def write_series_csv(series, path, label="max"):
    rows = [(label, point["N"], f"{point['fidelity']:.17g}") for point in series]
    _write_rows(path, SERIES_HEADER, rows)


def write_bounds_csv(rows, path):
    _write_rows(path, BOUNDS_HEADER, rows)
