"""Small dense complex linear algebra for few-qubit registers.

All operators act on Hilbert spaces of dimension 2**n with n <= MAX_QUBITS.
Qubit 0 is the most significant bit of a basis index, i.e. the top wire of a
circuit diagram: an operator acting on qubit 0 of a two-qubit register is
``kron(op, I2)``.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 5

I2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
PAULIS = (SX, SY, SZ)


def kron(a, b):
    """Kronecker product; dimensions multiply."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[0] * b.shape[0] > 2**MAX_QUBITS:
        raise ValueError(
            f"kron result dimension {a.shape[0] * b.shape[0]} exceeds "
            f"2**{MAX_QUBITS}"
        )
    return np.kron(a, b)


def embed_single(op, qubit, n):
    """Lift a 2x2 operator onto one qubit of an n-qubit register.

    Identity on every other qubit. Qubit 0 is the leftmost tensor factor.
    """
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for n={n}")
    if n > MAX_QUBITS:
        raise ValueError(f"n={n} exceeds MAX_QUBITS={MAX_QUBITS}")
    op = np.asarray(op, dtype=np.complex128)
    left = np.eye(2**qubit, dtype=np.complex128)
    right = np.eye(2 ** (n - 1 - qubit), dtype=np.complex128)
    return np.kron(left, np.kron(op, right))


def su2_exp(x, y, z):
    """Exact 2x2 exponential exp(-i (x*SX + y*SY + z*SZ)).

    Closed form cos(t)*I - i*(sin(t)/t)*(x*SX + y*SY + z*SZ) with
    t = sqrt(x^2 + y^2 + z^2); t = 0 gives the identity.
    """
    t = np.sqrt(x * x + y * y + z * z)
    if t == 0.0:
        return I2.copy()
    c = np.cos(t)
    s = np.sin(t) / t
    return np.array(
        [
            [c - 1j * z * s, (-1j * x - y) * s],
            [(-1j * x + y) * s, c + 1j * z * s],
        ],
        dtype=np.complex128,
    )


def trace_inner(a, b):
    """Hilbert-Schmidt inner product Tr(a^dagger b)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def unitarity_defect(u):
    """Max-norm of u^dagger u - I."""
    u = np.asarray(u)
    d = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.abs(d).max())


def nearest_unitary(m):
    """Polar projection onto the unitary group (drops the stretch factor)."""
    w, _, vh = np.linalg.svd(np.asarray(m, dtype=np.complex128))
    return w @ vh
