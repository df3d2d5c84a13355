"""Shared builders for seeded random models used across the test modules."""

import numpy as np

from enclosure_atlas.linalg import random_hermitian, random_unitary
from enclosure_atlas.oqrw import RateMatrix
from enclosure_atlas.semigroup import LindbladModel

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def unit(i, j, n=2):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def random_density(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_model(rng, n, num_jumps):
    """Dense generic model; typically irreducible with a faithful steady state."""
    jumps = [
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for _ in range(num_jumps)
    ]
    return LindbladModel.create(random_hermitian(rng, n), jumps)


def block_diag_model(rng, dims, num_jumps):
    """Direct sum of independent dense blocks: one enclosure per block."""
    n = sum(dims)
    h = np.zeros((n, n), dtype=complex)
    offset = 0
    blocks = []
    for d in dims:
        h[offset : offset + d, offset : offset + d] = random_hermitian(rng, d)
        blocks.append((offset, d))
        offset += d
    jumps = []
    for _ in range(num_jumps):
        op = np.zeros((n, n), dtype=complex)
        for offset, d in blocks:
            op[offset : offset + d, offset : offset + d] = rng.standard_normal(
                (d, d)
            ) + 1j * rng.standard_normal((d, d))
        jumps.append(op)
    return LindbladModel.create(h, jumps)


def leaky_model(rng, n, num_jumps):
    """Generic model plus a drain from the last level: nonzero transient part."""
    base = random_model(rng, n - 1, num_jumps)
    h = np.zeros((n, n), dtype=complex)
    h[: n - 1, : n - 1] = base.hamiltonian
    jumps = []
    for op in base.jumps:
        big = np.zeros((n, n), dtype=complex)
        big[: n - 1, : n - 1] = op
        jumps.append(big)
    drain = np.zeros((n, n), dtype=complex)
    drain[0, n - 1] = 1.0
    jumps.append(drain)
    return LindbladModel.create(h, jumps)


def conjugated_pair_model(rng, d, num_jumps):
    """Direct sum of a dense block and its conjugation by a random unitary.

    Forces a degenerate family of two equivalent d-dimensional enclosures
    whenever the base block is irreducible.
    """
    h0 = random_hermitian(rng, d)
    ops = [
        rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        for _ in range(num_jumps)
    ]
    w = random_unitary(rng, d)
    zero = np.zeros((d, d))
    h = np.block([[h0, zero], [zero, w @ h0 @ w.conj().T]])
    jumps = [np.block([[op, zero], [zero, w @ op @ w.conj().T]]) for op in ops]
    return LindbladModel.create(h, jumps), w


def random_rate_matrix(rng, n, density=0.5):
    """Seeded rate matrix with at most one fully inactive state."""
    mask = rng.random((n, n)) < density
    q = np.where(mask, rng.uniform(0.2, 1.2, (n, n)), 0.0)
    np.fill_diagonal(q, 0.0)
    zero_rows = [i for i in range(n) if q[i].sum() == 0.0]
    for i in zero_rows[1:]:
        q[i, (i + 1) % n] = 0.5
    np.fill_diagonal(q, -q.sum(axis=1))
    return RateMatrix.create(q)
