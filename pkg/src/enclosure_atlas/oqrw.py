"""Open quantum random walks and their classical Markov-chain counterparts.

A minimal walk (inner dimension one) encodes a continuous-time Markov chain;
its minimal enclosures are the closed communication classes and its extremal
invariant states carry the extremal invariant measures on the diagonal.

Index convention: the jump operator for a hop from state i to state j at rate
q[i, j] is sqrt(q[i, j]) |j><i|, matching the classical row convention
pi Q = 0. Transition operators of a general walk are keyed (destination,
source).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, dagger, frob, hermiticity_defect
from .semigroup import KrausChannel, LindbladModel

OQRW_CONVENTION_NOTE = (
    "jump from i to j at rate q[i][j]; operator sqrt(q[i][j]) |j><i| (row convention pi Q = 0)"
)


@dataclass(frozen=True)
class RateMatrix:
    """Generator of a continuous-time Markov chain (rows sum to zero)."""

    q: np.ndarray

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def create(cls, q, tol: Tolerances = DEFAULT_TOL) -> "RateMatrix":
        q = np.asarray(q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"rate matrix must be square, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("rate matrix has non-finite entries")
        n = q.shape[0]
        for i in range(n):
            for j in range(n):
                if i != j and q[i, j] < 0:
                    raise ValueError(f"rates[{i}][{j}] = {q[i, j]} must be nonnegative")
            if q[i, i] > tol.residual_tol:
                raise ValueError(f"rates[{i}][{i}] = {q[i, i]} must be nonpositive")
            row_sum = float(q[i].sum())
            if abs(row_sum) > tol.residual_tol:
                raise ValueError(f"row {i} sums to {row_sum}, expected 0")
        return cls(q=q)


@dataclass(frozen=True)
class OqrwSpec:
    """Walk on a finite graph with an internal degree of freedom.

    transition_ops maps (destination, source) vertex pairs to operators on
    the inner space. In discrete time each source column must satisfy the
    Kraus normalization sum_dest B†B = 1; in continuous time the entries are
    rate amplitudes and no normalization is imposed.
    """

    num_sites: int
    inner_dim: int
    transition_ops: Mapping
    local_hamiltonians: tuple[np.ndarray, ...] = field(default=())
    time_mode: str = "continuous"

    @classmethod
    def create(
        cls,
        num_sites: int,
        inner_dim: int,
        transition_ops: Mapping,
        local_hamiltonians: Sequence = (),
        time_mode: str = "continuous",
        tol: Tolerances = DEFAULT_TOL,
    ) -> "OqrwSpec":
        if time_mode not in ("continuous", "discrete"):
            raise ValueError(f"unknown time mode {time_mode!r}")
        ops = {}
        for key, op in transition_ops.items():
            dest, src = key
            if not (0 <= dest < num_sites and 0 <= src < num_sites):
                raise ValueError(f"transition key {key} outside the vertex range")
            op = np.asarray(op, dtype=complex)
            if op.shape != (inner_dim, inner_dim):
                raise ValueError(
                    f"transition operator {key} has shape {op.shape}, "
                    f"expected {(inner_dim, inner_dim)}"
                )
            ops[(dest, src)] = op
        hams = tuple(np.asarray(h, dtype=complex) for h in local_hamiltonians)
        if hams and len(hams) != num_sites:
            raise ValueError(f"expected {num_sites} local Hamiltonians, got {len(hams)}")
        for i, h in enumerate(hams):
            if h.shape != (inner_dim, inner_dim):
                raise ValueError(f"local Hamiltonian {i} has shape {h.shape}")
            if hermiticity_defect(h) > 100 * tol.residual_tol * max(1.0, frob(h)):
                raise ValueError(f"local Hamiltonian {i} is not Hermitian")
        if time_mode == "discrete":
            for src in range(num_sites):
                total = sum(
                    dagger(op) @ op for (dest, s), op in ops.items() if s == src
                )
                defect = frob(np.asarray(total) - np.eye(inner_dim))
                if defect > 100 * tol.residual_tol:
                    raise ValueError(
                        f"column {src} violates Kraus normalization: defect {defect:.3e}"
                    )
        return cls(
            num_sites=num_sites,
            inner_dim=inner_dim,
            transition_ops=ops,
            local_hamiltonians=hams,
            time_mode=time_mode,
        )


def minimal_oqrw(rate: RateMatrix) -> LindbladModel:
    """Lindblad model of the minimal walk: H = 0 and one jump per active edge."""
    n = rate.n
    jumps = []
    for i in range(n):
        for j in range(n):
            if i != j and rate.q[i, j] > 0:
                op = np.zeros((n, n), dtype=complex)
                op[j, i] = np.sqrt(rate.q[i, j])
                jumps.append(op)
    return LindbladModel.create(np.zeros((n, n)), jumps)


def _site_operator(op: np.ndarray, dest: int, src: int, num_sites: int) -> np.ndarray:
    hop = np.zeros((num_sites, num_sites), dtype=complex)
    hop[dest, src] = 1.0
    return np.kron(op, hop)


def general_oqrw(spec: OqrwSpec) -> LindbladModel:
    """Continuous-time walk on inner_space ⊗ C^num_sites.

    Jump operators are B ⊗ |dest><src| and the Hamiltonian is the block
    diagonal of the local terms.
    """
    if spec.time_mode != "continuous":
        raise ValueError("general_oqrw builds the continuous-time model; use oqrw_channel")
    dim = spec.inner_dim * spec.num_sites
    h = np.zeros((dim, dim), dtype=complex)
    for i, hi in enumerate(spec.local_hamiltonians):
        h += _site_operator(hi, i, i, spec.num_sites)
    jumps = [
        _site_operator(op, dest, src, spec.num_sites)
        for (dest, src), op in sorted(spec.transition_ops.items())
    ]
    return LindbladModel.create(h, jumps)


def oqrw_channel(spec: OqrwSpec, tol: Tolerances = DEFAULT_TOL) -> KrausChannel:
    """Discrete-time walk as a Kraus channel with operators B ⊗ |dest><src|."""
    if spec.time_mode != "discrete":
        raise ValueError("oqrw_channel builds the discrete-time channel; use general_oqrw")
    kraus = [
        _site_operator(op, dest, src, spec.num_sites)
        for (dest, src), op in sorted(spec.transition_ops.items())
    ]
    return KrausChannel.create(kraus, tol)


def spec_from_rate_matrix(rate: RateMatrix) -> OqrwSpec:
    """One-dimensional inner space encoding of a rate matrix."""
    ops = {}
    for i in range(rate.n):
        for j in range(rate.n):
            if i != j and rate.q[i, j] > 0:
                ops[(j, i)] = np.array([[np.sqrt(rate.q[i, j])]])
    return OqrwSpec.create(rate.n, 1, ops)


def closed_classes(rate: RateMatrix) -> list[list[int]]:
    """Closed communication classes of the chain.

    Strongly connected components of the directed graph of positive rates,
    restricted to components with no outgoing condensation edge. Each class
    is sorted ascending; the list is sorted by smallest member.
    """
    n = rate.n
    adjacency = [
        [j for j in range(n) if j != i and rate.q[i, j] > 0] for i in range(n)
    ]
    components = _tarjan_scc(adjacency)
    comp_of = {}
    for idx, comp in enumerate(components):
        for v in comp:
            comp_of[v] = idx
    closed = []
    for idx, comp in enumerate(components):
        if all(comp_of[j] == idx for v in comp for j in adjacency[v]):
            closed.append(sorted(comp))
    closed.sort(key=lambda c: c[0])
    return closed


def _tarjan_scc(adjacency: Sequence[Sequence[int]]) -> list[list[int]]:
    """Iterative Tarjan strongly-connected components."""
    n = len(adjacency)
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(adjacency[root]))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, edges = work[-1]
            advanced = False
            for w in edges:
                if index[w] == -1:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(adjacency[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def invariant_measures(rate: RateMatrix, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """One extremal invariant measure per closed class.

    Solves pi Q = 0 restricted to the class (the chain is irreducible there,
    so the solution is unique up to scale), normalized to a probability
    vector supported on the class.
    """
    measures = []
    for cls in closed_classes(rate):
        sub = rate.q[np.ix_(cls, cls)]
        # pi sub = 0  <=>  sub^T pi^T = 0
        _, s, vh = np.linalg.svd(sub.T)
        cutoff = tol.rank_tol * max(float(s[0]) if s.size else 0.0, 1.0)
        null = [vh[i] for i in range(len(cls)) if i >= s.size or s[i] <= cutoff]
        if len(null) != 1:
            raise ValueError(
                f"class {cls} yields a {len(null)}-dimensional balance kernel; "
                "class identification failed"
            )
        pi_local = null[0].real
        total = pi_local.sum()
        if abs(total) < tol.rank_tol:
            raise ValueError(f"balance solution on class {cls} has zero mass")
        pi_local = pi_local / total
        if pi_local.min() < -tol.residual_tol:
            raise ValueError(f"balance solution on class {cls} is not nonnegative")
        pi = np.zeros(rate.n)
        pi[cls] = np.clip(pi_local, 0.0, None)
        measures.append(pi / pi.sum())
    return measures


@dataclass(frozen=True)
class OqrwClause:
    name: str
    residual: float
    ok: bool


@dataclass(frozen=True)
class OqrwTheoremRecord:
    classes: tuple[tuple[int, ...], ...]
    measures: tuple[np.ndarray, ...]
    zero_diagonal_states: tuple[int, ...]
    clauses: tuple[OqrwClause, ...]
    passed: bool
    convention: str
    seed: int


def verify_oqrw_theorem(
    rate: RateMatrix, seed: int = 0, tol: Tolerances = DEFAULT_TOL
) -> OqrwTheoremRecord:
    """Cross-validate the walk's decomposition against the classical chain.

    Checks that each minimal enclosure is the coordinate span of exactly one
    closed class, that each extremal state is diagonal with the matching
    invariant measure, and that no degenerate families appear. States with a
    zero diagonal rate are flagged (fully inactive pairs can merge quantum
    mechanically) but do not abort the comparison.
    """
    from .decomposition import decompose, enumerate_minimal_enclosures

    classes = closed_classes(rate)
    measures = invariant_measures(rate, tol)
    report = decompose(minimal_oqrw(rate), seed=seed, tol=tol)
    enclosures = enumerate_minimal_enclosures(report)
    clauses: list[OqrwClause] = []

    def add(name, residual, ok=None):
        residual = float(residual)
        clauses.append(
            OqrwClause(
                name=name,
                residual=residual,
                ok=bool(residual <= 100 * tol.residual_tol) if ok is None else bool(ok),
            )
        )

    matched = set()
    for k, (cls, pi) in enumerate(zip(classes, measures)):
        target = np.zeros((rate.n, rate.n))
        target[cls, cls] = 1.0
        best = None
        for idx, (label, rec, _) in enumerate(enclosures):
            gap = frob(rec.projector - target)
            if best is None or gap < best[0]:
                best = (gap, idx, label, rec)
        gap, idx, label, rec = best if best else (np.inf, -1, "none", None)
        add(f"class{k}:projector_match:{label}", gap)
        if rec is not None:
            matched.add(idx)
            add(f"class{k}:state_match:{label}", frob(rec.extremal_state - np.diag(pi)))
    add(
        "enclosure_count",
        abs(len(enclosures) - len(classes)),
        ok=len(enclosures) == len(classes) and len(matched) == len(classes),
    )
    add("no_degenerate_families", float(len(report.families)), ok=not report.families)

    zero_diag = tuple(i for i in range(rate.n) if rate.q[i, i] == 0.0)
    return OqrwTheoremRecord(
        classes=tuple(tuple(c) for c in classes),
        measures=tuple(measures),
        zero_diagonal_states=zero_diag,
        clauses=tuple(clauses),
        passed=all(c.ok for c in clauses),
        convention=OQRW_CONVENTION_NOTE,
        seed=seed,
    )
