"""Recurrent/transient split and the decomposition of the recurrent subspace
into unique minimal enclosures and degenerate families of equivalent
enclosures.

The pipeline: the maximal-support invariant state gives the recurrent
projector; the Heisenberg generator compressed to the recurrent subspace (the
cut-off generator) has a fixed-point set that is a unital †-closed algebra;
its minimal central projections split the recurrent subspace into blocks, and
within each block the multiplicity of the algebra counts equivalent minimal
enclosures, linked by partial isometries recovered from matrix units.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    check_projector,
    cluster_sorted_values,
    dagger,
    fix_phase,
    frob,
    hermitian_basis,
    hermitian_part,
    hs_inner,
    kernel_basis,
    lex_key,
    matrix_exponential,
    orthonormal_hermitian_span,
    psd_project,
    require_square,
    support_projector,
)
from .semigroup import (
    VECTORIZATION_NOTE,
    KrausChannel,
    LindbladModel,
    Superoperator,
    adjoint_generator,
    apply,
    build_generator,
    channel_superoperator,
    choi_matrix,
    unvec,
    vec,
)


class DecompositionError(RuntimeError):
    """Pipeline failure tagged with the stage that produced it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass(frozen=True)
class RecurrentSplit:
    recurrent: np.ndarray
    transient: np.ndarray
    dimension: int
    method: str
    state: np.ndarray
    invariance_residual: float


@dataclass(frozen=True)
class EnclosureCheck:
    applicable: bool
    enclosed: bool
    residual: float | None
    leak: float


@dataclass(frozen=True)
class CentralBlock:
    projector: np.ndarray
    dimension: int
    multiplicity: int
    inner_dimension: int
    member_projectors: tuple[np.ndarray, ...]
    links: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class AlgebraStructure:
    recurrent_dimension: int
    fixed_point_dimension: int
    center_dimension: int
    blocks: tuple[CentralBlock, ...]
    fixed_point_basis: tuple[np.ndarray, ...]
    residuals: dict


@dataclass(frozen=True)
class EnclosureRecord:
    projector: np.ndarray
    dimension: int
    extremal_state: np.ndarray


@dataclass(frozen=True)
class DegenerateFamily:
    members: tuple[EnclosureRecord, ...]
    isometries: dict
    block_projector: np.ndarray


@dataclass(frozen=True)
class DecompositionReport:
    kind: str
    dim: int
    seed: int
    tolerances: Tolerances
    recurrent: np.ndarray
    transient: np.ndarray
    recurrent_dimension: int
    transient_dimension: int
    recurrent_method: str
    max_support_state: np.ndarray
    unique_enclosures: tuple[EnclosureRecord, ...]
    families: tuple[DegenerateFamily, ...]
    is_unique: bool
    residuals: dict
    conventions: dict


def _range_isometry(p: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Columns form an orthonormal basis of the range of a projector."""
    rank = check_projector(p, tol)
    w, u = np.linalg.eigh(hermitian_part(p))
    cols = u[:, w > 0.5]
    if cols.shape[1] != rank:
        raise ValueError("projector eigenvalues are not cleanly split at 1/2")
    return cols


def _compress_superop(mat: np.ndarray, iso: np.ndarray) -> np.ndarray:
    """Superoperator of A -> V† S(V A V†) V for an isometry V."""
    lift = np.kron(iso.conj(), iso)
    drop = np.kron(iso.T, dagger(iso))
    return drop @ mat @ lift


def _embed(iso: np.ndarray, x: np.ndarray) -> np.ndarray:
    return iso @ x @ dagger(iso)


def _spectral_zero_state(mat: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Spectral projection at eigenvalue 0 applied to the maximally mixed state.

    Uses a sorted Schur form; the oblique spectral projector is completed via
    a Sylvester solve. Raises RuntimeError whenever the split looks unsafe so
    the caller can fall back to averaging.
    """
    n2 = mat.shape[0]
    n = isqrt(n2)
    scale = max(1.0, float(np.linalg.norm(mat, 2)))
    thr = max(1e-12, tol.rank_tol) * scale
    t, z, sdim = scipy.linalg.schur(mat, output="complex", sort=lambda lam: abs(lam) <= thr)
    if sdim == 0:
        raise RuntimeError("no eigenvalue near zero found")
    if sdim == n2:
        proj = np.eye(n2)
    else:
        t11 = t[:sdim, :sdim]
        t12 = t[:sdim, sdim:]
        t22 = t[sdim:, sdim:]
        try:
            x = scipy.linalg.solve_sylvester(t11, -t22, t12)
        except Exception as exc:
            raise RuntimeError(f"Sylvester completion failed: {exc}") from None
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > 1e12:
            raise RuntimeError("spectral projector is numerically unstable")
        proj = np.zeros((n2, n2), dtype=complex)
        proj[:sdim, :sdim] = np.eye(sdim)
        proj[:sdim, sdim:] = x
        proj = z @ proj @ dagger(z)
    rho = hermitian_part(unvec(proj @ vec(np.eye(n) / n)))
    residual = float(np.linalg.norm(mat @ vec(rho)))
    if residual > tol.residual_tol:
        raise RuntimeError(f"spectral candidate is not invariant: residual {residual:.3e}")
    return rho


def _cesaro_state(
    mat: np.ndarray, tol: Tolerances, discrete: bool, max_doublings: int = 30
) -> np.ndarray:
    """Time/step average of the evolution applied to the maximally mixed state,
    over a doubling horizon, until the support stabilizes.

    Plain averaging converges like 1/T (and repeated squaring slowly
    accumulates roundoff), so the averaged state is polished with a few
    resolvent passes: each one keeps the zero-eigenvalue component exact and
    damps everything else by roughly lambda / gap.
    """
    n2 = mat.shape[0]
    n = isqrt(n2)
    v0 = vec(np.eye(n) / n)
    if discrete:
        # mat is Phi - Id; average the powers of Phi.
        step = mat + np.eye(n2)
        avg = np.eye(n2)
    else:
        block = np.zeros((2 * n2, 2 * n2), dtype=complex)
        block[:n2, :n2] = mat
        block[:n2, n2:] = np.eye(n2)
        exp_block = matrix_exponential(block)
        step = exp_block[:n2, :n2]
        avg = exp_block[:n2, n2:]  # integral of exp(s L) over [0, 1]
    prev_support = None
    stable = 0
    rho = hermitian_part(unvec(avg @ v0))
    for _ in range(max_doublings):
        rho = hermitian_part(unvec(avg @ v0))
        residual = float(np.linalg.norm(mat @ vec(rho)))
        support = support_projector(psd_project(rho, tol), tol)
        if prev_support is not None and frob(support - prev_support) <= tol.residual_tol:
            stable += 1
        else:
            stable = 0
        if stable >= 2 and residual <= 1e-4:
            break
        prev_support = support
        avg = (avg + step @ avg) / 2
        step = step @ step

    lam = 1e-5 * max(1.0, float(np.linalg.norm(mat, 2)))
    shifted = lam * np.eye(n2) - mat
    factor = scipy.linalg.lu_factor(shifted)
    v = vec(rho)
    for _ in range(3):
        v = lam * scipy.linalg.lu_solve(factor, v)
        rho = hermitian_part(unvec(v))
        v = vec(rho)
    residual = float(np.linalg.norm(mat @ vec(rho)))
    if residual <= tol.residual_tol:
        return rho
    raise RuntimeError(
        f"averaged state did not stabilize; final invariance residual {residual:.3e}"
    )


def recurrent_projector(
    gen: Superoperator,
    tol: Tolerances = DEFAULT_TOL,
    discrete: bool = False,
    method: str = "auto",
) -> RecurrentSplit:
    """Split the space into recurrent and transient parts.

    The recurrent projector is the support of the maximal-support invariant
    state, obtained from the spectral projection at eigenvalue 0 applied to
    the maximally mixed state (continuous time), or from a Cesàro average
    with doubling horizon (discrete time, and as a fallback). ``gen`` holds
    the generator, or the channel matrix minus the identity in discrete time.
    """
    if method not in ("auto", "spectral", "cesaro"):
        raise ValueError(f"unknown method {method!r}")
    used = None
    rho = None
    if method in ("auto", "spectral") and not (discrete and method == "auto"):
        try:
            rho = _spectral_zero_state(gen.matrix, tol)
            used = "spectral"
        except RuntimeError:
            if method == "spectral":
                raise
    if rho is None:
        rho = _cesaro_state(gen.matrix, tol, discrete)
        used = "cesaro"
    state = psd_project(rho, tol)
    recurrent = support_projector(state, tol)
    transient = np.eye(gen.dim) - recurrent
    residual = float(np.linalg.norm(gen.matrix @ vec(state)))
    return RecurrentSplit(
        recurrent=recurrent,
        transient=transient,
        dimension=int(round(np.trace(recurrent).real)),
        method=used,
        state=state,
        invariance_residual=residual,
    )


def cutoff_generator(adjoint_gen: Superoperator, p_r: np.ndarray) -> Superoperator:
    """Superoperator of A -> P_R L*(P_R A P_R) P_R.

    Its kernel, restricted to operators supported in the recurrent subspace,
    is the fixed-point set of the compressed Heisenberg evolution. In
    discrete time pass the adjoint channel minus the identity.
    """
    p_r = require_square(p_r)
    if p_r.shape != (adjoint_gen.dim, adjoint_gen.dim):
        raise ValueError("projector dimension does not match the superoperator")
    squeeze = np.kron(p_r.T, p_r)
    return Superoperator(dim=adjoint_gen.dim, matrix=squeeze @ adjoint_gen.matrix @ squeeze)


def is_enclosure(
    p_v: np.ndarray,
    cutoff: Superoperator,
    recurrent: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> EnclosureCheck:
    """Check whether a projector inside R projects onto an enclosure.

    Subspaces leaking outside the recurrent part are reported as not
    applicable rather than judged.
    """
    p_v = require_square(p_v)
    leak = frob((np.eye(cutoff.dim) - recurrent) @ p_v)
    if leak > tol.residual_tol:
        return EnclosureCheck(applicable=False, enclosed=False, residual=None, leak=leak)
    residual = frob(apply(cutoff, p_v))
    return EnclosureCheck(
        applicable=True,
        enclosed=bool(residual <= tol.residual_tol),
        residual=residual,
        leak=leak,
    )


def _center_basis(fbasis: Sequence[np.ndarray], tol: Tolerances) -> list[np.ndarray]:
    """Hermitian orthonormal basis of the center of the algebra spanned by fbasis."""
    k = len(fbasis)
    if k == 1:
        return list(fbasis)
    columns = []
    for a in fbasis:
        col = np.concatenate([(a @ b - b @ a).ravel() for b in fbasis])
        columns.append(col)
    a_mat = np.column_stack(columns)
    a_real = np.vstack([a_mat.real, a_mat.imag])
    _, s, vh = np.linalg.svd(a_real, full_matrices=True)
    sigma_max = float(s[0]) if s.size else 0.0
    cutoff = max(tol.rank_tol * sigma_max, tol.residual_tol)
    coeffs = [vh[i] for i in range(k) if i >= s.size or s[i] <= cutoff]
    center = []
    for c in coeffs:
        z = sum(ci * fi for ci, fi in zip(c, fbasis))
        center.append(z)
    return center


def _closure_residual(
    fbasis: Sequence[np.ndarray], rng: np.random.Generator, max_pairs: int = 200
) -> float:
    """Largest projection residual of pairwise products onto the span."""
    k = len(fbasis)
    flat = np.array([f.ravel() for f in fbasis])
    pairs = [(i, j) for i in range(k) for j in range(k)]
    if len(pairs) > max_pairs:
        idx = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in idx]
    worst = 0.0
    for i, j in pairs:
        prod = (fbasis[i] @ fbasis[j]).ravel()
        residual = float(np.linalg.norm(prod - flat.T @ (flat.conj() @ prod)))
        worst = max(worst, residual)
    return worst


def algebra_structure(
    cutoff: Superoperator,
    p_r: np.ndarray,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
    max_retries: int = 5,
) -> AlgebraStructure:
    """Block structure of the fixed-point algebra of the cut-off evolution.

    Restricted to the recurrent subspace, the fixed-point set is a unital
    †-closed algebra, isomorphic to a direct sum of full matrix algebras with
    multiplicity: each central block carries a multiplicity m and an inner
    dimension d with m*d = block dimension. Blocks with m = 1 hold a unique
    minimal enclosure; blocks with m >= 2 hold a degenerate family of m
    equivalent enclosures of dimension d, linked by matrix units. Generic
    elements are sampled with a seeded generator; ambiguous eigenvalue
    clusters trigger up to ``max_retries`` fresh samples, then an error.
    """
    rng = np.random.default_rng(seed)
    iso_r = _range_isometry(p_r, tol)
    r = iso_r.shape[1]
    compressed = _compress_superop(cutoff.matrix, iso_r)
    kern = kernel_basis(compressed, tol)
    if not kern:
        raise DecompositionError("algebra", "fixed-point space of the cut-off evolution is empty")
    fbasis = hermitian_basis([unvec(v) for v in kern], tol)

    residuals = {
        "algebra_invariance": max(
            float(np.linalg.norm(compressed @ vec(f))) for f in fbasis
        ),
        "algebra_unit_invariance": float(np.linalg.norm(compressed @ vec(np.eye(r)))),
        "algebra_closure": _closure_residual(fbasis, rng),
    }

    center = _center_basis(fbasis, tol)
    n_blocks = len(center)
    if n_blocks == 0:
        raise DecompositionError("algebra", "center of the fixed-point algebra is empty")

    clusters = None
    eigvecs = None
    for _ in range(max_retries):
        g = rng.standard_normal(n_blocks)
        generic = sum(gi * zi for gi, zi in zip(g, center))
        w, u = np.linalg.eigh(generic)
        parts = cluster_sorted_values(w, tol.eig_cluster_tol)
        if len(parts) == n_blocks:
            clusters = parts
            eigvecs = u
            break
    if clusters is None:
        raise DecompositionError(
            "algebra",
            f"central eigenvalue clustering stayed ambiguous after {max_retries} samples",
        )

    blocks = []
    for part in clusters:
        u_block = eigvecs[:, part]
        b = u_block.shape[1]
        restricted = [dagger(u_block) @ f @ u_block for f in fbasis]
        block_basis = orthonormal_hermitian_span(restricted, tol)
        m = isqrt(len(block_basis))
        if m * m != len(block_basis):
            raise DecompositionError(
                "algebra",
                f"block algebra dimension {len(block_basis)} is not a perfect square",
            )
        d, rem = divmod(b, m)
        if rem:
            raise DecompositionError(
                "algebra", f"multiplicity {m} does not divide block dimension {b}"
            )
        lift = iso_r @ u_block  # n x b isometry onto the central block
        if m == 1:
            proj = _embed(lift, np.eye(b))
            blocks.append(
                CentralBlock(
                    projector=proj,
                    dimension=b,
                    multiplicity=1,
                    inner_dimension=d,
                    member_projectors=(proj,),
                    links=(proj,),
                )
            )
            continue

        members = _split_block_members(block_basis, m, d, rng, tol, max_retries)
        links = _matrix_unit_links(block_basis, members, d, rng, tol, max_retries)
        blocks.append(
            CentralBlock(
                projector=_embed(lift, np.eye(b)),
                dimension=b,
                multiplicity=m,
                inner_dimension=d,
                member_projectors=tuple(_embed(lift, p) for p in members),
                links=tuple(_embed(lift, w) for w in links),
            )
        )

    unit_defects = []
    for block in blocks:
        for w in block.links[1:]:
            unit_defects.append(frob(dagger(w) @ w - block.member_projectors[0]))
    residuals["algebra_matrix_units"] = max(unit_defects, default=0.0)

    return AlgebraStructure(
        recurrent_dimension=r,
        fixed_point_dimension=len(fbasis),
        center_dimension=n_blocks,
        blocks=tuple(blocks),
        fixed_point_basis=tuple(_embed(iso_r, f) for f in fbasis),
        residuals=residuals,
    )


def _split_block_members(
    block_basis: Sequence[np.ndarray],
    m: int,
    d: int,
    rng: np.random.Generator,
    tol: Tolerances,
    max_retries: int,
) -> list[np.ndarray]:
    """Diagonal matrix units of a factor: eigenprojections of a generic
    Hermitian element, which has m distinct eigenvalues of multiplicity d."""
    for _ in range(max_retries):
        h = rng.standard_normal(len(block_basis))
        generic = sum(hi * bi for hi, bi in zip(h, block_basis))
        w, u = np.linalg.eigh(generic)
        parts = cluster_sorted_values(w, tol.eig_cluster_tol)
        if len(parts) == m and all(p.stop - p.start == d for p in parts):
            return [u[:, p] @ dagger(u[:, p]) for p in parts]
    raise DecompositionError(
        "algebra",
        f"could not isolate {m} eigenvalue clusters of size {d} after {max_retries} samples",
    )


def _matrix_unit_links(
    block_basis: Sequence[np.ndarray],
    members: Sequence[np.ndarray],
    d: int,
    rng: np.random.Generator,
    tol: Tolerances,
    max_retries: int,
) -> list[np.ndarray]:
    """Partial isometries w_g: member 0 -> member g inside the algebra.

    The corner p_g Y p_0 of a generic algebra element is a scalar multiple of
    the matrix unit, so scalar normalization recovers it without leaving the
    algebra.
    """
    p0 = members[0]
    for _ in range(max_retries):
        coeff = rng.standard_normal(len(block_basis)) + 1j * rng.standard_normal(
            len(block_basis)
        )
        generic = sum(ci * bi for ci, bi in zip(coeff, block_basis))
        links = [p0]
        ok = True
        for pg in members[1:]:
            corner = pg @ generic @ p0
            scale = np.sqrt(np.trace(dagger(corner) @ corner).real / d)
            if scale <= tol.eig_cluster_tol:
                ok = False
                break
            w = corner / scale
            if (
                frob(dagger(w) @ w - p0) > 100 * tol.residual_tol
                or frob(w @ dagger(w) - pg) > 100 * tol.residual_tol
            ):
                ok = False
                break
            links.append(w)
        if ok:
            return links
    raise DecompositionError(
        "algebra", f"could not normalize matrix units after {max_retries} samples"
    )


def extremal_state(
    p_v: np.ndarray, gen: Superoperator, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Unique invariant state supported in a minimal enclosure.

    Solves the generator compressed to the block; a kernel dimension other
    than one signals that the subspace is not a minimal enclosure.
    """
    iso = _range_isometry(p_v, tol)
    compressed = _compress_superop(gen.matrix, iso)
    kern = kernel_basis(compressed, tol)
    if len(kern) != 1:
        raise ValueError(
            f"compressed kernel dimension {len(kern)} != 1: subspace is not a minimal enclosure"
        )
    x = unvec(kern[0])
    trace = np.trace(x)
    if abs(trace) < 1e-6:
        raise ValueError("kernel element has near-zero trace; cannot normalize to a state")
    rho_block = psd_project(hermitian_part(x / trace), tol)
    return _embed(iso, rho_block)


def family_projector(
    q: np.ndarray,
    p_v1: np.ndarray,
    p_v2: np.ndarray,
    theta: float,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Projector cos²θ P_V1 + sin²θ P_V2 + sinθ cosθ (Q + Q†).

    Q must be a partial isometry from V1 onto V2; the result interpolates the
    continuum of equivalent enclosures spanned by a degenerate pair.
    """
    q = require_square(q)
    if (
        frob(dagger(q) @ q - p_v1) > 100 * tol.residual_tol
        or frob(q @ dagger(q) - p_v2) > 100 * tol.residual_tol
    ):
        raise ValueError("Q is not a partial isometry between the given subspaces")
    c, s = np.cos(theta), np.sin(theta)
    p_theta = c * c * p_v1 + s * s * p_v2 + s * c * (q + dagger(q))
    check_projector(p_theta, tol)
    return p_theta


def _prop_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Distance of a from the complex line spanned by b."""
    denom = hs_inner(b, b).real
    if denom == 0.0:
        return frob(a)
    c = hs_inner(b, a) / denom
    return frob(a - c * b)


def enumerate_minimal_enclosures(report: DecompositionReport) -> list[tuple]:
    """Flat (label, record, group) list: unique enclosures then family members.

    Two records share a group exactly when they belong to the same degenerate
    family; cross-group blocks of invariant states vanish.
    """
    out = []
    for i, rec in enumerate(report.unique_enclosures):
        out.append((f"alpha{i}", rec, ("alpha", i)))
    for b, fam in enumerate(report.families):
        for g, rec in enumerate(fam.members):
            out.append((f"beta{b}.{g}", rec, ("beta", b)))
    return out


def _effective_superoperators(obj, tol: Tolerances):
    """(kind, generator-like, adjoint-like) pair of superoperators.

    For channels the generator-like map is Phi - Id and its adjoint is
    Phi* - Id, so kernels and cut-off fixed points mean the same thing in
    both time modes.
    """
    if isinstance(obj, LindbladModel):
        return "lindblad", build_generator(obj), adjoint_generator(obj)
    if isinstance(obj, KrausChannel):
        phi = channel_superoperator(obj, tol)
        eye = np.eye(obj.dim**2)
        gen = Superoperator(dim=obj.dim, matrix=phi.matrix - eye)
        adj = Superoperator(dim=obj.dim, matrix=dagger(phi.matrix) - eye)
        return "kraus", gen, adj
    raise TypeError(f"cannot decompose object of type {type(obj).__name__}")


def _validate_input(obj, tol: Tolerances):
    if isinstance(obj, LindbladModel):
        LindbladModel.create(obj.hamiltonian, obj.jumps, tol)
    elif isinstance(obj, KrausChannel):
        KrausChannel.create(obj.kraus, tol)
        w = np.linalg.eigvalsh(choi_matrix(obj))
        if float(w[0]) < -tol.psd_tol:
            raise ValueError(f"channel is not completely positive: Choi eigenvalue {w[0]:.3e}")
    else:
        raise TypeError(f"cannot decompose object of type {type(obj).__name__}")


def decompose(
    obj,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
    method: str = "auto",
) -> DecompositionReport:
    """Full decomposition of a Lindblad model or Kraus channel.

    Returns the transient/recurrent projectors, unique minimal enclosures
    with their extremal invariant states, and degenerate families with the
    partial isometries linking their members. Deterministic for a fixed seed.
    """
    _validate_input(obj, tol)
    kind, gen, adj = _effective_superoperators(obj, tol)
    n = gen.dim

    def stage(name, fn):
        try:
            return fn()
        except DecompositionError:
            raise
        except Exception as exc:
            raise DecompositionError(name, str(exc)) from exc

    split = stage(
        "recurrent",
        lambda: recurrent_projector(gen, tol, discrete=(kind == "kraus"), method=method),
    )
    cut = stage("cutoff", lambda: cutoff_generator(adj, split.recurrent))
    structure = stage("algebra", lambda: algebra_structure(cut, split.recurrent, seed, tol))

    unique: list[EnclosureRecord] = []
    families: list[DegenerateFamily] = []
    enclosure_residuals = []
    extremal_residuals = []

    def build_record(projector):
        state = extremal_state(projector, gen, tol)
        check = is_enclosure(projector, cut, split.recurrent, tol)
        if not (check.applicable and check.enclosed):
            raise ValueError(
                f"reported projector failed the enclosure check "
                f"(residual {check.residual}, leak {check.leak:.3e})"
            )
        enclosure_residuals.append(check.residual)
        extremal_residuals.append(float(np.linalg.norm(gen.matrix @ vec(state))))
        return EnclosureRecord(
            projector=projector,
            dimension=check_projector(projector, tol),
            extremal_state=state,
        )

    def build_all():
        for block in structure.blocks:
            if block.multiplicity == 1:
                unique.append(build_record(block.projector))
                continue
            records = [build_record(p) for p in block.member_projectors]
            order = sorted(range(len(records)), key=lambda i: lex_key(records[i].projector))
            records = [records[i] for i in order]
            links = [block.links[i] for i in order]
            isometries = {}
            for a in range(len(records)):
                for b in range(len(records)):
                    if a == b:
                        continue
                    isometries[(a, b)] = fix_phase(links[b] @ dagger(links[a]))
            families.append(
                DegenerateFamily(
                    members=tuple(records),
                    isometries=isometries,
                    block_projector=block.projector,
                )
            )

    stage("enclosures", build_all)

    unique.sort(key=lambda rec: (-rec.dimension, lex_key(rec.projector)))
    families.sort(
        key=lambda fam: (-fam.members[0].dimension, lex_key(fam.block_projector))
    )

    def assemble():
        minimal = [rec.projector for rec in unique]
        for fam in families:
            minimal.extend(rec.projector for rec in fam.members)
        total = sum(minimal) if minimal else np.zeros((n, n))
        ortho = 0.0
        for i in range(len(minimal)):
            for j in range(i + 1, len(minimal)):
                ortho = max(ortho, frob(minimal[i] @ minimal[j]))
        transport = 0.0
        isometry_defect = 0.0
        for fam in families:
            for (a, b), q in fam.isometries.items():
                rho_a = fam.members[a].extremal_state
                rho_b = fam.members[b].extremal_state
                transport = max(transport, frob(q @ rho_a @ dagger(q) - rho_b))
                isometry_defect = max(
                    isometry_defect,
                    frob(dagger(q) @ q - fam.members[a].projector),
                    frob(q @ dagger(q) - fam.members[b].projector),
                )
        residuals = dict(structure.residuals)
        residuals.update(
            {
                "recurrent_invariance": split.invariance_residual,
                "projector_sum": frob(total - split.recurrent),
                "orthogonality": ortho,
                "enclosure_invariance": max(enclosure_residuals, default=0.0),
                "extremal_invariance": max(extremal_residuals, default=0.0),
                "family_state_transport": transport,
                "family_isometry": isometry_defect,
            }
        )
        return residuals

    residuals = stage("report", assemble)

    return DecompositionReport(
        kind=kind,
        dim=n,
        seed=seed,
        tolerances=tol,
        recurrent=split.recurrent,
        transient=split.transient,
        recurrent_dimension=split.dimension,
        transient_dimension=n - split.dimension,
        recurrent_method=split.method,
        max_support_state=split.state,
        unique_enclosures=tuple(unique),
        families=tuple(families),
        is_unique=not families,
        residuals=residuals,
        conventions={"vectorization": VECTORIZATION_NOTE},
    )


@dataclass(frozen=True)
class VerificationClause:
    name: str
    residual: float
    ok: bool


@dataclass(frozen=True)
class VerificationRecord:
    clauses: tuple[VerificationClause, ...]
    max_residual: float
    ok: bool


def _random_invariant_states(
    report: DecompositionReport, gen: Superoperator, tol: Tolerances, count: int = 3
) -> list[np.ndarray]:
    """Exactly invariant states: the maximal-support state plus small
    kernel-space perturbations kept within its positive part."""
    rng = np.random.default_rng(report.seed + 7919)
    rho_max = report.max_support_state
    kern = kernel_basis(gen.matrix, tol)
    basis = hermitian_basis([unvec(v) for v in kern], tol)
    states = [rho_max]
    if len(basis) <= 1:
        return states
    w = np.linalg.eigvalsh(rho_max)
    positive = w[w > tol.rank_tol * max(w[-1], tol.psd_tol)]
    lam_min = float(positive[0]) if positive.size else 0.0
    if lam_min <= 0.0:
        return states
    for _ in range(count):
        coeff = rng.standard_normal(len(basis))
        x = sum(c * f for c, f in zip(coeff, basis))
        x = x - np.trace(x).real * rho_max  # keep the perturbation traceless
        scale = float(np.linalg.norm(x, 2))
        if scale == 0.0:
            continue
        states.append(rho_max + (0.45 * lam_min / scale) * x)
    return states


def verify_decomposition(
    report: DecompositionReport, obj, tol: Tolerances = DEFAULT_TOL
) -> VerificationRecord:
    """Numerically check the block structure of invariant states.

    On the maximal-support invariant state and random invariant states:
    diagonal blocks are proportional to the extremal states, cross blocks
    between distinct enclosure groups vanish, and within a degenerate family
    the off-diagonal block composed with the partial isometry is proportional
    to the extremal state. Diagnostics only; never raises on failed clauses.
    """
    kind, gen, _ = _effective_superoperators(obj, tol)
    if kind != report.kind:
        raise ValueError(f"report kind {report.kind!r} does not match object kind {kind!r}")
    enclosures = enumerate_minimal_enclosures(report)
    states = _random_invariant_states(report, gen, tol)
    clauses: list[VerificationClause] = []

    def add(name, residual):
        clauses.append(
            VerificationClause(
                name=name, residual=float(residual), ok=bool(residual <= tol.residual_tol)
            )
        )

    for label, rec, _ in enclosures:
        add(f"extremal_invariance:{label}", np.linalg.norm(gen.matrix @ vec(rec.extremal_state)))
        add(
            f"extremal_support:{label}",
            frob((np.eye(report.dim) - rec.projector) @ rec.extremal_state),
        )

    for i, sigma in enumerate(states):
        add(f"state{i}:recurrent_support", frob(report.transient @ sigma))
        for label, rec, _ in enclosures:
            block = rec.projector @ sigma @ rec.projector
            add(f"state{i}:diag:{label}", _prop_residual(block, rec.extremal_state))
        for a in range(len(enclosures)):
            for b in range(a + 1, len(enclosures)):
                la, ra, ga = enclosures[a]
                lb, rb, gb = enclosures[b]
                if ga == gb:
                    continue
                add(f"state{i}:cross:{la}|{lb}", frob(ra.projector @ sigma @ rb.projector))
        for fb, fam in enumerate(report.families):
            for (a, b), q in fam.isometries.items():
                block = fam.members[a].projector @ sigma @ fam.members[b].projector @ q
                add(
                    f"state{i}:family{fb}:offdiag:{a}->{b}",
                    _prop_residual(block, fam.members[a].extremal_state),
                )

    worst = max((c.residual for c in clauses), default=0.0)
    return VerificationRecord(
        clauses=tuple(clauses), max_residual=worst, ok=all(c.ok for c in clauses)
    )
