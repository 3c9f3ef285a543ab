"""Compiled inner loop for the rotation optimizer.

Same algorithm as the reference path in ``grape``; flat complex vectors with
explicit bit-stride loops, JIT-compiled. States and row-major-flattened
operators go through identical code, with operator strides pre-scaled by the
matrix dimension. Agreement with the reference is to roundoff, not bitwise.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .circuits import ParamCircuit


@njit(cache=True)
def _apply1q(flat, u, stride):
    L = flat.size
    for base in range(0, L, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            a = flat[i0]
            b = flat[i1]
            flat[i0] = u[0, 0] * a + u[0, 1] * b
            flat[i1] = u[1, 0] * a + u[1, 1] * b


@njit(cache=True)
def _apply1q_dag(flat, u, stride):
    c00 = np.conj(u[0, 0])
    c01 = np.conj(u[1, 0])
    c10 = np.conj(u[0, 1])
    c11 = np.conj(u[1, 1])
    L = flat.size
    for base in range(0, L, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            a = flat[i0]
            b = flat[i1]
            flat[i0] = c00 * a + c01 * b
            flat[i1] = c10 * a + c11 * b


@njit(cache=True)
def _applycz(flat, mask):
    for i in range(flat.size):
        if (i & mask) == mask:
            flat[i] = -flat[i]


@njit(cache=True)
def _applycu(flat, u, cstride, tstride):
    L = flat.size
    for cb in range(0, L, 2 * cstride):
        start = cb + cstride
        for tb in range(start, start + cstride, 2 * tstride):
            for i0 in range(tb, tb + tstride):
                i1 = i0 + tstride
                a = flat[i0]
                b = flat[i1]
                flat[i0] = u[0, 0] * a + u[0, 1] * b
                flat[i1] = u[1, 0] * a + u[1, 1] * b


@njit(cache=True)
def _applycu_dag(flat, u, cstride, tstride):
    c00 = np.conj(u[0, 0])
    c01 = np.conj(u[1, 0])
    c10 = np.conj(u[0, 1])
    c11 = np.conj(u[1, 1])
    L = flat.size
    for cb in range(0, L, 2 * cstride):
        start = cb + cstride
        for tb in range(start, start + cstride, 2 * tstride):
            for i0 in range(tb, tb + tstride):
                i1 = i0 + tstride
                a = flat[i0]
                b = flat[i1]
                flat[i0] = c00 * a + c01 * b
                flat[i1] = c10 * a + c11 * b


@njit(cache=True)
def _pauli_sums(lam, psi, stride):
    s00 = 0j
    s01 = 0j
    s10 = 0j
    s11 = 0j
    L = lam.size
    for base in range(0, L, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            l0 = np.conj(lam[i0])
            l1 = np.conj(lam[i1])
            p0 = psi[i0]
            p1 = psi[i1]
            s00 += l0 * p0
            s01 += l0 * p1
            s10 += l1 * p0
            s11 += l1 * p1
    return s00, s01, s10, s11


@njit(cache=True)
def _pauli_sums_cu(lam, psi, cstride, tstride):
    s00 = 0j
    s01 = 0j
    s10 = 0j
    s11 = 0j
    L = lam.size
    for cb in range(0, L, 2 * cstride):
        start = cb + cstride
        for tb in range(start, start + cstride, 2 * tstride):
            for i0 in range(tb, tb + tstride):
                i1 = i0 + tstride
                l0 = np.conj(lam[i0])
                l1 = np.conj(lam[i1])
                p0 = psi[i0]
                p1 = psi[i1]
                s00 += l0 * p0
                s01 += l0 * p1
                s10 += l1 * p0
                s11 += l1 * p1
    return s00, s01, s10, s11


@njit(cache=True)
def _lmul_su2(x, y, z, r):
    # r <- exp(-i (x SX + y SY + z SZ)) @ r
    t = np.sqrt(x * x + y * y + z * z)
    if t == 0.0:
        return
    c = np.cos(t)
    s = np.sin(t) / t
    g00 = c - 1j * z * s
    g01 = (-1j * x - y) * s
    g10 = (-1j * x + y) * s
    g11 = c + 1j * z * s
    a = r[0, 0]
    b = r[0, 1]
    d = r[1, 0]
    e = r[1, 1]
    r[0, 0] = g00 * a + g01 * d
    r[0, 1] = g00 * b + g01 * e
    r[1, 0] = g10 * a + g11 * d
    r[1, 1] = g10 * b + g11 * e


@njit(cache=True)
def _polar2(r):
    # project onto the nearest unitary: r (r^dag r)^(-1/2), closed 2x2 form
    a00 = (np.conj(r[0, 0]) * r[0, 0] + np.conj(r[1, 0]) * r[1, 0]).real
    a01 = np.conj(r[0, 0]) * r[0, 1] + np.conj(r[1, 0]) * r[1, 1]
    a11 = (np.conj(r[0, 1]) * r[0, 1] + np.conj(r[1, 1]) * r[1, 1]).real
    t = a00 + a11
    d = a00 * a11 - (a01 * np.conj(a01)).real
    s = np.sqrt(d) if d > 0.0 else 0.0
    denom = np.sqrt(t + 2.0 * s)
    m00 = (a00 + s) / denom
    m11 = (a11 + s) / denom
    m01 = a01 / denom
    m10 = np.conj(a01) / denom
    det = m00 * m11 - m01 * m10
    i00 = m11 / det
    i01 = -m01 / det
    i10 = -m10 / det
    i11 = m00 / det
    a = r[0, 0]
    b = r[0, 1]
    c = r[1, 0]
    e = r[1, 1]
    r[0, 0] = a * i00 + b * i10
    r[0, 1] = a * i01 + b * i11
    r[1, 0] = c * i00 + e * i10
    r[1, 1] = c * i01 + e * i11


@njit(cache=True)
def _grape_run(
    x0,
    target,
    norm,
    n,
    m,
    N,
    is_cu,
    qstrides,
    gate_masks,
    gate_qubits,
    rot,
    cu_rot,
    best_rot,
    best_cu,
    max_iter,
    step0,
    adaptive,
    stop_inf,
    reunit_every,
    trace,
):
    L = x0.size
    layers = np.empty((N + 1, L), dtype=np.complex128)
    n_cu = N if is_cu else 1
    cu_states = np.empty((n_cu, L), dtype=np.complex128)
    flat = np.empty(L, dtype=np.complex128)
    lam = np.empty(L, dtype=np.complex128)
    K = n + m * N
    P = K + (N if is_cu else 0)
    grad = np.empty((P, 3), dtype=np.float64)
    best_f = -1.0
    f_prev = 0.0
    step = step0
    it = 0
    evals = 0
    while True:
        # forward sweep, recording the state after every rotation layer
        for i in range(L):
            flat[i] = x0[i]
        for q in range(n):
            _apply1q(flat, rot[q], qstrides[q])
        layers[0, :] = flat
        for j in range(N):
            if is_cu:
                _applycu(
                    flat,
                    cu_rot[j],
                    qstrides[gate_qubits[j, 0]],
                    qstrides[gate_qubits[j, 1]],
                )
                cu_states[j, :] = flat
            else:
                _applycz(flat, gate_masks[j])
            for k in range(m):
                _apply1q(flat, rot[n + j * m + k], qstrides[gate_qubits[j, k]])
            layers[j + 1, :] = flat
        c = 0j
        for i in range(L):
            c += np.conj(target[i]) * flat[i]
        fid = (c.real * c.real + c.imag * c.imag) / norm
        trace[evals] = fid
        evals += 1
        if fid > best_f:
            best_f = fid
            best_rot[:] = rot
            if is_cu:
                best_cu[:] = cu_rot
        if adaptive and it > 0:
            if fid < f_prev:
                step = step * 0.5
            else:
                step = step * 1.05
                if step > step0:
                    step = step0
        f_prev = fid
        if 1.0 - fid < stop_inf or it >= max_iter:
            break
        # backward sweep: peel operators off lam, gradient per insertion point
        cf = (2.0 / norm) * np.conj(c)
        for i in range(L):
            lam[i] = target[i]
        for j in range(N - 1, -1, -1):
            for k in range(m):
                q = gate_qubits[j, k]
                s00, s01, s10, s11 = _pauli_sums(lam, layers[j + 1], qstrides[q])
                row = n + j * m + k
                grad[row, 0] = ((s01 + s10) * cf).imag
                grad[row, 1] = ((1j * (s10 - s01)) * cf).imag
                grad[row, 2] = ((s00 - s11) * cf).imag
            for k in range(m):
                _apply1q_dag(lam, rot[n + j * m + k], qstrides[gate_qubits[j, k]])
            if is_cu:
                cs = qstrides[gate_qubits[j, 0]]
                ts = qstrides[gate_qubits[j, 1]]
                s00, s01, s10, s11 = _pauli_sums_cu(lam, cu_states[j], cs, ts)
                row = K + j
                grad[row, 0] = ((s01 + s10) * cf).imag
                grad[row, 1] = ((1j * (s10 - s01)) * cf).imag
                grad[row, 2] = ((s00 - s11) * cf).imag
                _applycu_dag(lam, cu_rot[j], cs, ts)
            else:
                _applycz(lam, gate_masks[j])
        for q in range(n):
            s00, s01, s10, s11 = _pauli_sums(lam, layers[0], qstrides[q])
            grad[q, 0] = ((s01 + s10) * cf).imag
            grad[q, 1] = ((1j * (s10 - s01)) * cf).imag
            grad[q, 2] = ((s00 - s11) * cf).imag
        # absorb the small update rotations into the stored rotations
        for p in range(K):
            _lmul_su2(step * grad[p, 0], step * grad[p, 1], step * grad[p, 2], rot[p])
        if is_cu:
            for j in range(N):
                _lmul_su2(
                    step * grad[K + j, 0],
                    step * grad[K + j, 1],
                    step * grad[K + j, 2],
                    cu_rot[j],
                )
        it += 1
        if it % reunit_every == 0:
            for p in range(K):
                _polar2(rot[p])
            if is_cu:
                for j in range(N):
                    _polar2(cu_rot[j])
    return best_f, it, evals


def optimize_packed(pc, ctx, settings):
    """Pack a ParamCircuit into kernel arrays, run, unpack the best circuit."""
    config = pc.config
    n, m, N = config.n, config.m, config.size
    is_cu = config.entangler == "cu"
    qstrides = np.asarray(ctx.stride, dtype=np.int64)
    gate_masks = np.asarray(ctx.masks, dtype=np.int64).reshape(N)
    gate_qubits = np.asarray(config.gates, dtype=np.int64).reshape(N, m)
    rot = np.concatenate(
        [pc.init_rot, pc.post_rot.reshape(-1, 2, 2)], axis=0
    ).astype(np.complex128)
    cu_rot = (
        pc.cu_rot.copy() if is_cu else np.zeros((0, 2, 2), dtype=np.complex128)
    )
    best_rot = rot.copy()
    best_cu = cu_rot.copy()
    trace = np.empty(settings.max_iterations + 1, dtype=np.float64)
    best_f, iters, evals = _grape_run(
        ctx.x0,
        ctx.target_flat,
        ctx.norm,
        n,
        m,
        N,
        is_cu,
        qstrides,
        gate_masks,
        gate_qubits,
        rot,
        cu_rot,
        best_rot,
        best_cu,
        settings.max_iterations,
        settings.step_size,
        settings.adaptive,
        settings.stop_infidelity,
        settings.reunit_every,
        trace,
    )
    best = ParamCircuit(
        config,
        best_rot[:n].copy(),
        best_rot[n:].reshape(N, m, 2, 2).copy(),
        best_cu.copy() if is_cu else None,
    )
    return best_f, iters, best, trace[:evals].copy()


def warmup():
    """Trigger JIT compilation once (e.g. before forking worker processes)."""
    from .grape import OptimizerSettings, init_rotations, _Ctx
    from .circuits import GateConfiguration
    from .seeds import child_rng
    from .targets import TargetSpec

    psi = np.zeros(4, dtype=np.complex128)
    psi[-1] = 1.0
    for entangler in ("cz", "cu"):
        config = GateConfiguration(2, 2, ((0, 1),), entangler)
        target = TargetSpec("state", 2, psi, "warmup")
        pc = init_rotations(config, child_rng(0))
        ctx = _Ctx(config, target)
        optimize_packed(pc, ctx, OptimizerSettings(max_iterations=2, engine="fast"))
