"""Lindblad generators, quantum channels, and their dense superoperator forms.

Vectorization uses the column-stacking convention throughout:
vec(A X B) = (B^T ⊗ A) vec(X). A superoperator is the n² × n² matrix acting
on column-stacked n × n operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    dagger,
    frob,
    hermitian_basis,
    hermiticity_defect,
    kernel_basis,
    matrix_exponential,
    psd_project,
    require_square,
)

VECTORIZATION_NOTE = "column-stacking: vec(A X B) = (B^T kron A) vec(X)"


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")

def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return np.asarray(v).reshape((n, n), order="F")


def sandwich_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of X -> A X B."""
    return np.kron(np.asarray(b).T, np.asarray(a))


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus jump operators defining a Lindblad generator."""

    dim: int
    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]

    @classmethod
    def create(cls, hamiltonian, jumps=(), tol: Tolerances = DEFAULT_TOL) -> "LindbladModel":
        h = require_square(hamiltonian)
        n = h.shape[0]
        ops = tuple(require_square(j) for j in jumps)
        for k, op in enumerate(ops):
            if op.shape != (n, n):
                raise ValueError(f"jump operator {k} has shape {op.shape}, expected {(n, n)}")
        if hermiticity_defect(h) > 100 * tol.residual_tol * max(1.0, frob(h)):
            raise ValueError("hamiltonian is not Hermitian within tolerance")
        return cls(dim=n, hamiltonian=h, jumps=ops)


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    dim: int
    kraus: tuple[np.ndarray, ...]

    @classmethod
    def create(cls, kraus: Sequence, tol: Tolerances = DEFAULT_TOL) -> "KrausChannel":
        ops = tuple(require_square(v) for v in kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        n = ops[0].shape[0]
        for k, op in enumerate(ops):
            if op.shape != (n, n):
                raise ValueError(f"Kraus operator {k} has shape {op.shape}, expected {(n, n)}")
        defect = frob(sum(dagger(v) @ v for v in ops) - np.eye(n))
        if defect > 100 * tol.residual_tol:
            raise ValueError(f"Kraus operators are not trace preserving: defect {defect:.3e}")
        return cls(dim=n, kraus=ops)


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix representation of a linear map on n x n operators."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(
                f"superoperator matrix has shape {m.shape}, expected {(self.dim**2,) * 2}"
            )


def build_generator(model: LindbladModel) -> Superoperator:
    """Schrödinger-picture generator rho -> -i[H,rho] + sum_j D[L_j](rho)."""
    n = model.dim
    eye = np.eye(n)
    h = model.hamiltonian
    mat = -1j * (sandwich_superop(h, eye) - sandwich_superop(eye, h))
    for op in model.jumps:
        gram = dagger(op) @ op
        mat += sandwich_superop(op, dagger(op))
        mat -= 0.5 * (sandwich_superop(gram, eye) + sandwich_superop(eye, gram))
    return Superoperator(dim=n, matrix=mat)


def adjoint_generator(model: LindbladModel) -> Superoperator:
    """Heisenberg-picture generator A -> i[H,A] + sum_j (L_j† A L_j - ½{L_j†L_j, A})."""
    n = model.dim
    eye = np.eye(n)
    h = model.hamiltonian
    mat = 1j * (sandwich_superop(h, eye) - sandwich_superop(eye, h))
    for op in model.jumps:
        gram = dagger(op) @ op
        mat += sandwich_superop(dagger(op), op)
        mat -= 0.5 * (sandwich_superop(gram, eye) + sandwich_superop(eye, gram))
    return Superoperator(dim=n, matrix=mat)


def channel_superoperator(channel: KrausChannel, tol: Tolerances = DEFAULT_TOL) -> Superoperator:
    """Matrix sum_j conj(V_j) ⊗ V_j of the channel rho -> sum_j V_j rho V_j†."""
    n = channel.dim
    defect = frob(sum(dagger(v) @ v for v in channel.kraus) - np.eye(n))
    if defect > 100 * tol.residual_tol:
        raise ValueError(f"Kraus normalization violated: defect {defect:.3e}")
    mat = sum(sandwich_superop(v, dagger(v)) for v in channel.kraus)
    return Superoperator(dim=n, matrix=mat)


def apply(s: Superoperator, a: np.ndarray) -> np.ndarray:
    a = require_square(a)
    if a.shape != (s.dim, s.dim):
        raise ValueError(f"operator shape {a.shape} does not match superoperator dim {s.dim}")
    return unvec(s.matrix @ vec(a))


def propagate(
    s: Superoperator, t: float, rho: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Evolve a density matrix by exp(t L); t must be nonnegative."""
    if t < 0:
        raise ValueError("propagation time must be nonnegative")
    rho = require_square(rho)
    evolved = unvec(matrix_exponential(t * s.matrix) @ vec(rho))
    drift = abs(np.trace(evolved).real - 1.0) + abs(np.trace(evolved).imag)
    if drift > 1e-6:
        raise ValueError(
            f"trace drift {drift:.3e} after propagation; input is not a trace-preserving generator"
        )
    return psd_project(evolved, tol)


def choi_matrix(channel: KrausChannel) -> np.ndarray:
    """Choi matrix sum_j vec(V_j) vec(V_j)† in the column-stacking convention."""
    cols = [vec(v)[:, None] for v in channel.kraus]
    return sum(c @ dagger(c) for c in cols)


@dataclass(frozen=True)
class ModelDiagnostics:
    kind: str
    dim: int
    hermiticity_residual: float
    trace_residual: float
    choi_min_eigenvalue: float | None
    ok: bool


def validate(obj, tol: Tolerances = DEFAULT_TOL) -> ModelDiagnostics:
    """Diagnostics for a model or channel; never raises on bad numbers."""
    if isinstance(obj, LindbladModel):
        herm = hermiticity_defect(obj.hamiltonian)
        gen = build_generator(obj)
        trace_res = float(np.linalg.norm(vec(np.eye(obj.dim)).conj() @ gen.matrix))
        ok = bool(herm <= 100 * tol.residual_tol and trace_res <= 100 * tol.residual_tol)
        return ModelDiagnostics("lindblad", obj.dim, herm, trace_res, None, ok)
    if isinstance(obj, KrausChannel):
        trace_res = frob(sum(dagger(v) @ v for v in obj.kraus) - np.eye(obj.dim))
        w = np.linalg.eigvalsh(choi_matrix(obj))
        choi_min = float(w[0])
        ok = bool(trace_res <= 100 * tol.residual_tol and choi_min >= -tol.psd_tol)
        return ModelDiagnostics("kraus", obj.dim, 0.0, trace_res, choi_min, ok)
    raise TypeError(f"cannot validate object of type {type(obj).__name__}")


def fixed_point_basis(
    s: Superoperator, mode: str = "generator", tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """Hermitian orthonormal basis of the fixed-point space.

    mode "generator": solutions of L(A) = 0; mode "channel": solutions of
    Phi(A) = A. A trace-preserving map always has a fixed point in finite
    dimension, so an empty result signals numerical failure and raises.
    """
    if mode == "generator":
        target = s.matrix
    elif mode == "channel":
        target = s.matrix - np.eye(s.dim**2)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'generator' or 'channel'")
    kernel = kernel_basis(target, tol)
    if not kernel:
        raise RuntimeError(
            "empty fixed-point space for a trace-preserving map: numerical failure"
        )
    return hermitian_basis([unvec(v) for v in kernel], tol)
