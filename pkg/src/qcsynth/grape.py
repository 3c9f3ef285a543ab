"""Gradient-ascent optimizer for the rotations of a fixed gate configuration.

The discrete gate layout stays fixed; only the single-qubit rotations (and in
cu mode the per-gate 2x2 unitaries) are optimized. Each iteration imagines an
infinitesimal extra rotation exp(-i(dx*SX + dy*SY + dz*SZ)) inserted after
every stored rotation, computes the exact first-order derivative of the
fidelity with respect to every (dx, dy, dz) from one forward and one backward
sweep, then absorbs the small update rotation into the stored rotation it
follows. Large rotations are never linearized; only the update is, which
keeps the first-order step valid at any point of the landscape.

Derivatives at zero update angle, with c the target overlap of the full
circuit:

  state prep:  dF/dd = 2 Im( <lam| H |psi> * conj(c) )
  unitary:     dF/dd = (2 / 4**n) Im( Tr(P^dag H X) * conj(T) )

psi/X are propagated forward to the insertion point, lam/P backward from the
target, H is the Pauli generator on the insertion qubit (in cu mode the
projector-conditioned generator |1><1|_c x sigma_a on the pair). Rotations
within one layer act on distinct qubits and commute, so every insertion
point of a layer shares that layer's forward and backward states.

Two engines produce the same math: a plain-numpy reference (this module) and
a compiled kernel (``_kernels``). They agree to roundoff but not bit-for-bit;
any determinism contract holds per engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    ParamCircuit,
    _apply_1q_flat,
    _apply_cu_flat,
    _apply_cz_flat,
    _bit_stride,
    cz_mask,
)
from .linalg import nearest_unitary, su2_exp
from .seeds import child_rng

DEFAULT_REUNIT_EVERY = 10_000


@dataclass
class OptimizerSettings:
    max_iterations: int = 1000
    step_size: float = 0.05
    adaptive: bool = True
    stop_infidelity: float = 1e-13
    seed: int = 0
    reunit_every: int = DEFAULT_REUNIT_EVERY
    engine: str = "auto"  # "auto" | "fast" | "reference"
    record_trace: bool = False
    trace_stride: int = 10

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.engine not in ("auto", "fast", "reference"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class OptResult:
    config_id: int
    final_fidelity: float
    iterations_used: int
    circuit: ParamCircuit = field(repr=False)
    fidelity_trace: np.ndarray = field(default=None, repr=False)
    restarts_used: int = 1


def insertion_points(config):
    """Update-insertion points in gradient-row order.

    Rows 0..n-1: after the initial rotation on qubit q. Then one row per
    post-gate rotation (gate-major, subset order). In cu mode the per-gate
    unitaries come last.
    """
    pts = [("init", q) for q in range(config.n)]
    for j, gate in enumerate(config.gates):
        for k, q in enumerate(gate):
            pts.append(("post", j, k, q))
    if config.entangler == "cu":
        pts.extend(("cu", j) for j in range(config.size))
    return pts


def init_rotations(config, rng):
    """Random starting circuit: every rotation su2_exp of uniform [0, 2pi)^3.

    Draws a single (rotation_count, 3) block in storage order (init layer,
    post rotations gate-major, then cu unitaries), so results are a pure
    function of the generator state.
    """
    n, m, N = config.n, config.m, config.size
    cu = config.entangler == "cu"
    total = n + m * N + (N if cu else 0)
    angles = rng.uniform(0.0, 2.0 * np.pi, (total, 3))
    mats = np.empty((total, 2, 2), dtype=np.complex128)
    for i, (x, y, z) in enumerate(angles):
        mats[i] = su2_exp(x, y, z)
    init = mats[:n]
    post = mats[n : n + m * N].reshape(N, m, 2, 2)
    cu_rot = mats[n + m * N :].copy() if cu else None
    return ParamCircuit(config, init.copy(), post.copy(), cu_rot)


# --- propagation context ------------------------------------------------


class _Ctx:
    """Flattened propagation plan for one (config, target) pair.

    States and operators share the same code path: an operator is its
    row-major flattening, where a qubit's row bit has stride
    2**(n-1-q) * dim and a CZ mask scales by dim.
    """

    def __init__(self, config, target):
        if target.n != config.n:
            raise ValueError(
                f"target has n={target.n} but configuration has n={config.n}"
            )
        n = config.n
        dim = 2**n
        self.config = config
        self.mode = target.kind
        if target.kind == "state":
            scale = 1
            self.norm = 1.0
            x0 = np.zeros(dim, dtype=np.complex128)
            x0[0] = 1.0
            self.target_flat = target.payload.copy()
        else:
            scale = dim
            self.norm = float(dim) ** 2
            x0 = np.eye(dim, dtype=np.complex128).reshape(-1)
            self.target_flat = target.payload.reshape(-1).copy()
        self.x0 = x0
        self.stride = [scale * _bit_stride(q, n) for q in range(n)]
        self.masks = [scale * cz_mask(g, n) for g in config.gates]


def _point_derivs(lam, psi, stride, cfactor):
    """The three axis derivatives at one insertion point.

    cfactor = (2/norm) * conj(c); the pairwise sums s_ab over the qubit's
    bit slices assemble <lam|sigma_a|psi> without forming any matrix.
    """
    lv = lam.reshape(-1, 2, stride)
    pv = psi.reshape(-1, 2, stride)
    l0 = lv[:, 0, :].conj()
    l1 = lv[:, 1, :].conj()
    s00 = np.sum(l0 * pv[:, 0, :])
    s01 = np.sum(l0 * pv[:, 1, :])
    s10 = np.sum(l1 * pv[:, 0, :])
    s11 = np.sum(l1 * pv[:, 1, :])
    gx = s01 + s10
    gy = 1j * (s10 - s01)
    gz = s00 - s11
    return np.array([(gx * cfactor).imag, (gy * cfactor).imag, (gz * cfactor).imag])


def _cu_point_derivs(lam, psi, cstride, tstride, cfactor):
    """Axis derivatives for the projector-conditioned generator |1><1| x sigma_a."""
    mid = cstride // (2 * tstride)
    lv = lam.reshape(-1, 2, mid, 2, tstride)[:, 1]
    pv = psi.reshape(-1, 2, mid, 2, tstride)[:, 1]
    l0 = lv[:, :, 0, :].conj()
    l1 = lv[:, :, 1, :].conj()
    s00 = np.sum(l0 * pv[:, :, 0, :])
    s01 = np.sum(l0 * pv[:, :, 1, :])
    s10 = np.sum(l1 * pv[:, :, 0, :])
    s11 = np.sum(l1 * pv[:, :, 1, :])
    gx = s01 + s10
    gy = 1j * (s10 - s01)
    gz = s00 - s11
    return np.array([(gx * cfactor).imag, (gy * cfactor).imag, (gz * cfactor).imag])


def _forward(pc, ctx, record=False):
    config = ctx.config
    n, N = config.n, config.size
    flat = ctx.x0.copy()
    layers = [None] * (N + 1) if record else None
    cu_states = [None] * N if record else None
    for q in range(n):
        flat = _apply_1q_flat(flat, pc.init_rot[q], ctx.stride[q])
    if record:
        layers[0] = flat
    for j, gate in enumerate(config.gates):
        if config.entangler == "cz":
            flat = _apply_cz_flat(flat, ctx.masks[j])
        else:
            c, t = gate
            flat = _apply_cu_flat(flat, pc.cu_rot[j], ctx.stride[c], ctx.stride[t])
        if record:
            cu_states[j] = flat
        for k, q in enumerate(gate):
            flat = _apply_1q_flat(flat, pc.post_rot[j, k], ctx.stride[q])
        if record:
            layers[j + 1] = flat
    return flat, layers, cu_states


def _overlap_fidelity(flat, ctx):
    c = np.vdot(ctx.target_flat, flat)
    return float(abs(c) ** 2 / ctx.norm), c


def circuit_fidelity(pc, target):
    """Fidelity of a parameterized circuit against a target."""
    ctx = _Ctx(pc.config, target)
    flat, _, _ = _forward(pc, ctx)
    return _overlap_fidelity(flat, ctx)[0]


def _fidelity_and_gradient(pc, ctx):
    config = ctx.config
    n, m, N = config.n, config.m, config.size
    cu = config.entangler == "cu"
    flat, layers, cu_states = _forward(pc, ctx, record=True)
    fid, c = _overlap_fidelity(flat, ctx)
    cfactor = (2.0 / ctx.norm) * np.conj(c)

    rows = n + m * N + (N if cu else 0)
    grad = np.zeros((rows, 3))
    lam = ctx.target_flat.copy()
    for j in reversed(range(N)):
        gate = config.gates[j]
        for k, q in enumerate(gate):
            grad[n + j * m + k] = _point_derivs(
                lam, layers[j + 1], ctx.stride[q], cfactor
            )
        for k, q in enumerate(gate):
            lam = _apply_1q_flat(lam, pc.post_rot[j, k].conj().T, ctx.stride[q])
        if cu:
            cq, tq = gate
            grad[n + m * N + j] = _cu_point_derivs(
                lam, cu_states[j], ctx.stride[cq], ctx.stride[tq], cfactor
            )
            lam = _apply_cu_flat(
                lam, pc.cu_rot[j].conj().T, ctx.stride[cq], ctx.stride[tq]
            )
        else:
            lam = _apply_cz_flat(lam, ctx.masks[j])
    for q in range(n):
        grad[q] = _point_derivs(lam, layers[0], ctx.stride[q], cfactor)
    return fid, grad


def gradient(pc, target):
    """Fidelity derivative for every insertion point, rows as insertion_points."""
    ctx = _Ctx(pc.config, target)
    return _fidelity_and_gradient(pc, ctx)[1]


def _apply_updates(pc, grad, step):
    config = pc.config
    n, m, N = config.n, config.m, config.size
    for q in range(n):
        d = step * grad[q]
        pc.init_rot[q] = su2_exp(*d) @ pc.init_rot[q]
    for j in range(N):
        for k in range(m):
            d = step * grad[n + j * m + k]
            pc.post_rot[j, k] = su2_exp(*d) @ pc.post_rot[j, k]
    if config.entangler == "cu":
        for j in range(N):
            d = step * grad[n + m * N + j]
            pc.cu_rot[j] = su2_exp(*d) @ pc.cu_rot[j]


def _reunitarize(pc):
    for q in range(pc.config.n):
        pc.init_rot[q] = nearest_unitary(pc.init_rot[q])
    for j in range(pc.config.size):
        for k in range(pc.config.m):
            pc.post_rot[j, k] = nearest_unitary(pc.post_rot[j, k])
    if pc.cu_rot is not None:
        for j in range(pc.config.size):
            pc.cu_rot[j] = nearest_unitary(pc.cu_rot[j])


def _optimize_reference(pc, ctx, settings):
    step = settings.step_size
    best_f = -1.0
    best = pc.copy()
    trace = []
    f_prev = None
    it = 0
    while True:
        fid, grad = _fidelity_and_gradient(pc, ctx)
        trace.append(fid)
        if fid > best_f:
            best_f = fid
            best = pc.copy()
        if settings.adaptive and f_prev is not None:
            step = step * 0.5 if fid < f_prev else min(step * 1.05, settings.step_size)
        f_prev = fid
        if 1.0 - fid < settings.stop_infidelity or it >= settings.max_iterations:
            break
        _apply_updates(pc, grad, step)
        it += 1
        if it % settings.reunit_every == 0:
            _reunitarize(pc)
    return best_f, it, best, np.array(trace)


def _run_engine(pc, target, settings):
    ctx = _Ctx(pc.config, target)
    engine = settings.engine
    if engine in ("auto", "fast"):
        try:
            from . import _kernels

            return _kernels.optimize_packed(pc, ctx, settings)
        except ImportError:
            if engine == "fast":
                raise
    return _optimize_reference(pc, ctx, settings)


def optimize(config, target, settings, rng=None):
    """Optimize one configuration's rotations from a random start.

    Non-convergence is a result, not an error; the best-seen parameters are
    returned, never the last-seen ones.
    """
    if rng is None:
        rng = child_rng(settings.seed)
    pc = init_rotations(config, rng)
    best_f, iters, best, trace = _run_engine(pc, target, settings)
    if settings.record_trace:
        trace = trace[:: max(1, settings.trace_stride)]
    else:
        trace = None
    return OptResult(config.config_id, best_f, iters, best, trace)


def multi_restart(config, target, settings, restarts, seed_key=()):
    """Best result over independent restarts with derived child seeds.

    Restart r draws from child (seed, *seed_key, r); stops early once the
    stop infidelity is reached.
    """
    if restarts < 1:
        raise ValueError("need restarts >= 1")
    best = None
    used = 0
    for r in range(restarts):
        rng = child_rng(settings.seed, *seed_key, r)
        res = optimize(config, target, settings, rng=rng)
        used += 1
        if best is None or res.final_fidelity > best.final_fidelity:
            best = res
        if 1.0 - best.final_fidelity < settings.stop_infidelity:
            break
    best.restarts_used = used
    return best
