"""Dense complex linear-algebra primitives with tolerance-controlled rank,
support, and positivity operations.

Operators are plain complex ``numpy.ndarray`` values; structural properties
(Hermitian, projector, density matrix) are enforced by check helpers rather
than by wrapper types. Every function here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across the package.

    rank_tol         relative singular-value / eigenvalue cutoff for rank decisions
    eig_cluster_tol  absolute width used to group near-degenerate eigenvalues
    residual_tol     acceptance threshold for linear identities
    psd_tol          magnitude below which negative eigenvalues count as noise
    """

    rank_tol: float = 1e-9
    eig_cluster_tol: float = 1e-7
    residual_tol: float = 1e-8
    psd_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_tol", "eig_cluster_tol", "residual_tol", "psd_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive and finite")
        if self.rank_tol >= 1:
            raise ValueError("rank_tol must be < 1")

    def replace(self, **kwargs) -> "Tolerances":
        import dataclasses

        return dataclasses.replace(self, **kwargs)


DEFAULT_TOL = Tolerances()


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def require_square(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(a† b)."""
    return complex(np.vdot(a, b))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + dagger(a)) / 2


def hermiticity_defect(a: np.ndarray) -> float:
    """Frobenius norm of a - a†."""
    return frob(a - dagger(a))


def projector_defect(p: np.ndarray) -> float:
    """max(‖P² − P‖_F, ‖P − P†‖_F); zero for an orthogonal projector."""
    p = require_square(p)
    return max(frob(p @ p - p), hermiticity_defect(p))


def check_projector(p: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    """Validate an orthogonal projector and return its rank (rounded trace)."""
    defect = projector_defect(p)
    if defect > 100 * tol.residual_tol:
        raise ValueError(f"not a projector: idempotency/Hermiticity defect {defect:.3e}")
    tr = np.trace(p).real
    rank = int(round(tr))
    if abs(tr - rank) > 100 * tol.residual_tol:
        raise ValueError(f"projector trace {tr} is not near an integer")
    return rank


def support_projector(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the numerical range of a PSD Hermitian matrix.

    Keeps eigenvectors with eigenvalue > rank_tol * lambda_max; the zero
    matrix maps to the zero projector.
    """
    a = require_square(a)
    if hermiticity_defect(a) > 100 * tol.residual_tol * max(1.0, frob(a)):
        raise ValueError("support_projector requires a Hermitian input")
    w, u = np.linalg.eigh(hermitian_part(a))
    lam_max = float(w[-1]) if w.size else 0.0
    if w.size and float(w[0]) < -10 * max(tol.psd_tol, tol.rank_tol * abs(lam_max)):
        raise ValueError(f"input is not positive semidefinite: min eigenvalue {w[0]:.3e}")
    if lam_max <= tol.psd_tol:
        return np.zeros_like(a)
    keep = w > tol.rank_tol * lam_max
    v = u[:, keep]
    return v @ dagger(v)


def kernel_basis(m: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the numerical null space via SVD.

    Returns the right-singular vectors whose singular value is at most
    rank_tol * max(sigma_max, 1); the absolute floor keeps matrices that are
    zero up to rounding noise from reporting an empty kernel.
    """
    m = as_matrix(m)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    n = m.shape[1]
    sigma_max = float(s[0]) if s.size else 0.0
    cutoff = tol.rank_tol * max(sigma_max, 1.0)
    vectors = []
    for i in range(n):
        if i >= s.size or s[i] <= cutoff:
            vectors.append(vh[i].conj())
    return vectors


# Hermitian matrices form a real vector space; the maps below embed them
# isometrically (for the HS inner product) into real coordinate vectors so
# that real SVD can orthonormalize without leaving the Hermitian cone.

def _herm_to_real(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    iu = np.triu_indices(n, k=1)
    return np.concatenate([
        np.diag(x).real,
        np.sqrt(2.0) * x[iu].real,
        np.sqrt(2.0) * x[iu].imag,
    ])


def _real_to_herm(v: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    k = iu[0].size
    x = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(x, v[:n])
    upper = (v[n:n + k] + 1j * v[n + k:n + 2 * k]) / np.sqrt(2.0)
    x[iu] = upper
    x[(iu[1], iu[0])] = upper.conj()
    return x


def orthonormal_hermitian_span(
    candidates: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """HS-orthonormal Hermitian basis of the real span of Hermitian matrices."""
    if not candidates:
        return []
    n = candidates[0].shape[0]
    rows = np.array([_herm_to_real(hermitian_part(x)) for x in candidates])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    keep = s > tol.rank_tol * s[0]
    return [_real_to_herm(vh[i], n) for i in range(len(s)) if keep[i]]


def hermitian_basis(
    span: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> list[np.ndarray]:
    """HS-orthonormal Hermitian basis of a †-closed matrix span.

    The input span must be closed under the adjoint (checked); the output is
    built from the Hermitian and anti-Hermitian parts of the inputs followed
    by re-orthonormalization, and spans the same space over the complex field.
    """
    mats = [require_square(x) for x in span]
    if not mats:
        return []
    n = mats[0].shape[0]
    for x in mats:
        if x.shape != (n, n):
            raise ValueError("all matrices in the span must share one shape")

    stacked = np.array([x.ravel() for x in mats])
    _, s, vh = np.linalg.svd(stacked, full_matrices=False)
    keep = s > tol.rank_tol * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, bool)
    basis = vh[keep]
    for x in mats:
        target = dagger(x).ravel()
        residual = float(np.linalg.norm(target - basis.T @ (basis.conj() @ target)))
        if residual > tol.residual_tol * max(1.0, frob(x)):
            raise ValueError(
                f"span is not closed under the adjoint: projection residual {residual:.3e}"
            )

    candidates: list[np.ndarray] = []
    for x in mats:
        candidates.append((x + dagger(x)) / 2)
        candidates.append((x - dagger(x)) / 2j)
    result = orthonormal_hermitian_span(candidates, tol)
    if len(result) != int(np.count_nonzero(keep)):
        raise ValueError("Hermitian re-orthonormalization changed the span dimension")
    return result


def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """exp(m) for a square complex matrix (scaling-and-squaring Pade)."""
    return scipy.linalg.expm(require_square(m))


def psd_project(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Clip spectral noise and renormalize a near-state to unit trace.

    Eigenvalues below psd_tol are zeroed; an error is raised when the clipped
    mass exceeds 1% of the trace, which signals the input was not close to a
    density matrix, or when the trace is too small to normalize.
    """
    a = require_square(a)
    if hermiticity_defect(a) > 100 * tol.residual_tol * max(1.0, frob(a)):
        raise ValueError("psd_project requires a Hermitian input")
    w, u = np.linalg.eigh(hermitian_part(a))
    trace = float(w.sum())
    if trace <= tol.psd_tol:
        raise ValueError(f"trace {trace:.3e} too small to normalize")
    clipped_mass = float(np.abs(w[w < tol.psd_tol]).sum())
    if clipped_mass > 0.01 * trace:
        raise ValueError(
            f"clipped eigenvalue mass {clipped_mass:.3e} exceeds 1% of trace {trace:.3e}"
        )
    w = np.where(w < tol.psd_tol, 0.0, w)
    rho = (u * w) @ dagger(u)
    return hermitian_part(rho / w.sum())


def cluster_sorted_values(values: np.ndarray, width: float) -> list[slice]:
    """Group an ascending 1-d array into clusters split at gaps > width."""
    if values.size == 0:
        return []
    edges = [0]
    for i in range(1, values.size):
        if values[i] - values[i - 1] > width:
            edges.append(i)
    edges.append(values.size)
    return [slice(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitian_part(g)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def lex_key(m: np.ndarray, decimals: int = 12) -> tuple:
    """Deterministic ordering key: rounded row-major (re, im) interleaving."""
    flat = np.asarray(m, dtype=complex).ravel()
    rounded = np.round(np.column_stack([flat.real, flat.imag]), decimals)
    return tuple(rounded.ravel().tolist())


def fix_phase(q: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude entry is real positive."""
    flat = np.asarray(q).ravel()
    mags = np.round(np.abs(flat), decimals)
    idx = int(np.argmax(mags))
    pivot = flat[idx]
    if abs(pivot) == 0.0:
        return np.array(q, copy=True)
    return np.asarray(q) * (pivot.conjugate() / abs(pivot))
