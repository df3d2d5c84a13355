"""Identifiability checks tying measurement statistics to uniqueness of the
enclosure decomposition.

Covers three regimes: nondemolition models (all operators diagonal in one
pointer basis) with the pairwise non-degeneracy condition, continuous-time
identifiability through jump-operator expectations, and discrete-time optimal
identifiability through outcome-word probabilities. Separations at or below
residual_tol count as equality; reports always carry the raw magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    dagger,
    frob,
    hermitian_part,
)
from .semigroup import (
    KrausChannel,
    LindbladModel,
    build_generator,
    fixed_point_basis,
)
from .decomposition import (
    DecompositionReport,
    decompose,
    enumerate_minimal_enclosures,
)

TOLERANCE_POLICY_NOTE = "separations at or below residual_tol count as equality"


@dataclass(frozen=True)
class QndModel:
    """Pointer-basis data of a nondemolition model.

    energies[a] is the pointer energy; amplitudes[j, a] the amplitude of
    channel j on pointer a. Channels with index <= split are diffusive
    (Wiener-type, compared through r = 2 Re c), the rest are jump
    (Poisson-type, compared through theta = |c|^2). split = -1 marks all
    channels as jump-type.
    """

    energies: np.ndarray
    amplitudes: np.ndarray
    split: int

    @property
    def num_pointers(self) -> int:
        return self.energies.size

    @property
    def num_channels(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def create(cls, energies, amplitudes, split: int) -> "QndModel":
        energies = np.asarray(energies, dtype=float)
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if energies.ndim != 1:
            raise ValueError("energies must be a vector")
        if amplitudes.ndim != 2 or amplitudes.shape[1] != energies.size:
            raise ValueError(
                f"amplitudes must have shape (channels, {energies.size}), got {amplitudes.shape}"
            )
        if not (-1 <= split <= amplitudes.shape[0] - 1):
            raise ValueError(
                f"split {split} outside [-1, {amplitudes.shape[0] - 1}]"
            )
        return cls(energies=energies, amplitudes=amplitudes, split=split)

    def r(self) -> np.ndarray:
        """Diffusive signatures r(j|a) = c + conj(c)."""
        return 2.0 * self.amplitudes.real

    def theta(self) -> np.ndarray:
        """Jump signatures theta(j|a) = |c|^2."""
        return np.abs(self.amplitudes) ** 2


def qnd_to_model(qnd: QndModel) -> LindbladModel:
    """Lindblad model with all operators diagonal in the pointer basis."""
    h = np.diag(qnd.energies.astype(complex))
    jumps = [np.diag(qnd.amplitudes[j]) for j in range(qnd.num_channels)]
    return LindbladModel.create(h, jumps)


@dataclass(frozen=True)
class QndDiagnosis:
    is_qnd: bool
    max_commutator_residual: float
    model: QndModel | None
    basis: np.ndarray | None


def qnd_diagonalize(
    model: LindbladModel,
    tol: Tolerances = DEFAULT_TOL,
    seed: int = 0,
    split: int | None = None,
    max_retries: int = 5,
) -> QndDiagnosis:
    """Find a common eigenbasis of the Hamiltonian and all jump operators.

    Succeeds when every operator is normal and all pairs commute within
    tolerance (for normal operators pairwise commutation propagates to the
    adjoints). The diffusive/jump split is not recoverable from the
    operators, so it is taken from ``split`` and defaults to all-diffusive.
    """
    ops = [model.hamiltonian] + list(model.jumps)
    worst = 0.0
    for a in ops:
        worst = max(worst, frob(a @ dagger(a) - dagger(a) @ a) / max(1.0, frob(a) ** 2))
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            scale = max(1.0, frob(ops[i]) * frob(ops[j]))
            worst = max(worst, frob(ops[i] @ ops[j] - ops[j] @ ops[i]) / scale)
    if worst > tol.residual_tol:
        return QndDiagnosis(False, worst, None, None)

    rng = np.random.default_rng(seed)
    n = model.dim
    for _ in range(max_retries):
        combo = rng.standard_normal() * hermitian_part(model.hamiltonian)
        for op in model.jumps:
            combo = combo + rng.standard_normal() * (op + dagger(op))
            combo = combo + rng.standard_normal() * ((op - dagger(op)) / 1j)
        _, u = np.linalg.eigh(combo)
        off = 0.0
        for a in ops:
            rotated = dagger(u) @ a @ u
            off = max(
                off,
                frob(rotated - np.diag(np.diag(rotated))) / max(1.0, frob(a)),
            )
        if off <= 100 * tol.residual_tol:
            energies = np.diag(dagger(u) @ model.hamiltonian @ u).real
            amplitudes = np.array(
                [np.diag(dagger(u) @ op @ u) for op in model.jumps]
            ).reshape(len(model.jumps), n)
            if split is None:
                split = len(model.jumps) - 1
            qnd = QndModel.create(energies, amplitudes, split)
            return QndDiagnosis(True, worst, qnd, u)
    return QndDiagnosis(False, worst, None, None)


@dataclass(frozen=True)
class PairVerdict:
    a: int
    b: int
    separated: bool
    witness: str | None
    magnitude: float


@dataclass(frozen=True)
class IdentifiabilityReport:
    mode: str
    labels: tuple[str, ...]
    pairs: tuple[PairVerdict, ...]
    overall: bool
    hypothesis_violated: bool
    policy: str = TOLERANCE_POLICY_NOTE


def nondegeneracy_check(qnd: QndModel, tol: Tolerances = DEFAULT_TOL) -> IdentifiabilityReport:
    """Pairwise pointer distinguishability: some diffusive channel separates
    the r signatures, or some jump channel separates the theta signatures."""
    r = qnd.r()
    theta = qnd.theta()
    labels = tuple(f"pointer{a}" for a in range(qnd.num_pointers))
    pairs = []
    for a in range(qnd.num_pointers):
        for b in range(a + 1, qnd.num_pointers):
            witness = None
            magnitude = 0.0
            for j in range(qnd.num_channels):
                diffusive = j <= qnd.split
                gap = abs(r[j, a] - r[j, b]) if diffusive else abs(theta[j, a] - theta[j, b])
                if gap > magnitude:
                    magnitude = gap
                if witness is None and gap > tol.residual_tol:
                    witness = f"{'diffusive r' if diffusive else 'jump theta'}[{j}]"
            pairs.append(
                PairVerdict(
                    a=a,
                    b=b,
                    separated=witness is not None,
                    witness=witness,
                    magnitude=float(magnitude),
                )
            )
    return IdentifiabilityReport(
        mode="qnd-nondegeneracy",
        labels=labels,
        pairs=tuple(pairs),
        overall=all(p.separated for p in pairs),
        hypothesis_violated=False,
    )


def omega(qnd: QndModel, a: int, b: int, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Decay/rotation coefficient of the (a, b) pointer coherence.

    omega = i (e_a - e_b) + sum_j (c_ja conj(c_jb) - theta_ja/2 - theta_jb/2).
    Its real part equals minus half the squared distance of the amplitude
    rows, which is verified internally on every call.
    """
    if a == b:
        raise ValueError("omega is defined for distinct pointers")
    c = qnd.amplitudes
    value = 1j * (qnd.energies[a] - qnd.energies[b])
    value += np.sum(c[:, a] * c[:, b].conj() - 0.5 * np.abs(c[:, a]) ** 2 - 0.5 * np.abs(c[:, b]) ** 2)
    expected_real = -0.5 * float(np.sum(np.abs(c[:, a] - c[:, b]) ** 2))
    if abs(value.real - expected_real) > tol.residual_tol * max(1.0, abs(expected_real)):
        raise RuntimeError(
            "internal identity violated: Re(omega) does not match the sum-of-squares form"
        )
    return complex(value)


@dataclass(frozen=True)
class QndUniquenessRecord:
    nondegenerate: bool
    re_omega: dict
    omega_all_negative: bool
    decomposition_unique: bool
    pointer_enclosures: bool
    diagonal_fixed_points_residual: float
    consistent: bool


def qnd_uniqueness(
    qnd: QndModel, tol: Tolerances = DEFAULT_TOL, seed: int = 0
) -> QndUniquenessRecord:
    """Check that non-degeneracy forces a unique decomposition.

    Under non-degeneracy every Re omega(a, b) must be strictly negative, the
    reconstructed model must decompose uniquely into the pointer spans, and
    every fixed point must be diagonal in the pointer basis.
    """
    nondeg = nondegeneracy_check(qnd, tol)
    re_omega = {}
    all_negative = True
    for a in range(qnd.num_pointers):
        for b in range(qnd.num_pointers):
            if a == b:
                continue
            value = omega(qnd, a, b, tol)
            re_omega[(a, b)] = float(value.real)
            if value.real >= -tol.residual_tol:
                all_negative = False
    if nondeg.overall and not all_negative:
        raise RuntimeError(
            "non-degeneracy holds but some Re(omega) is not strictly negative"
        )

    model = qnd_to_model(qnd)
    report = decompose(model, seed=seed, tol=tol)
    gen = build_generator(model)
    basis = fixed_point_basis(gen, "generator", tol)
    diag_residual = max(
        (frob(x - np.diag(np.diag(x))) for x in basis), default=0.0
    )
    pointer_enclosures = report.is_unique and all(
        rec.dimension == 1 for rec in report.unique_enclosures
    ) and len(report.unique_enclosures) == qnd.num_pointers

    consistent = bool(
        (not nondeg.overall)
        or (
            all_negative
            and report.is_unique
            and pointer_enclosures
            and diag_residual <= 100 * tol.residual_tol
        )
    )
    return QndUniquenessRecord(
        nondegenerate=nondeg.overall,
        re_omega=re_omega,
        omega_all_negative=all_negative,
        decomposition_unique=report.is_unique,
        pointer_enclosures=pointer_enclosures,
        diagonal_fixed_points_residual=float(diag_residual),
        consistent=consistent,
    )


def continuous_identifiability(
    model: LindbladModel,
    report: DecompositionReport,
    tol: Tolerances = DEFAULT_TOL,
) -> IdentifiabilityReport:
    """Pairwise separation of extremal states through tr((L_j + L_j†) rho).

    The underlying uniqueness statement assumes no transient part; with a
    transient present the check still runs but the report is marked as a
    hypothesis violation.
    """
    enclosures = enumerate_minimal_enclosures(report)
    labels = tuple(label for label, _, _ in enclosures)
    observables = [op + dagger(op) for op in model.jumps]
    pairs = []
    for a in range(len(enclosures)):
        for b in range(a + 1, len(enclosures)):
            rho_a = enclosures[a][1].extremal_state
            rho_b = enclosures[b][1].extremal_state
            witness = None
            magnitude = 0.0
            for j, obs in enumerate(observables):
                gap = abs(np.trace(obs @ (rho_a - rho_b)).real)
                if gap > magnitude:
                    magnitude = gap
                if witness is None and gap > tol.residual_tol:
                    witness = f"channel[{j}]"
            pairs.append(PairVerdict(a, b, witness is not None, witness, float(magnitude)))
    return IdentifiabilityReport(
        mode="continuous",
        labels=labels,
        pairs=tuple(pairs),
        overall=all(p.separated for p in pairs),
        hypothesis_violated=report.transient_dimension > 0,
    )


def discrete_identifiability(
    channel: KrausChannel,
    report: DecompositionReport,
    max_len: int = 6,
    tol: Tolerances = DEFAULT_TOL,
) -> IdentifiabilityReport:
    """Breadth-first search for outcome words separating extremal states.

    Words are explored in shortest-then-lexicographic order, so the recorded
    witness is the canonical shortest one. The magnitude of an unseparated
    pair is the largest trace gap seen across all explored words.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    k = len(channel.kraus)
    if k**max_len > 10**7:
        raise ValueError(
            f"word search would visit {k}^{max_len} > 1e7 words; lower max_len"
        )
    enclosures = enumerate_minimal_enclosures(report)
    labels = tuple(label for label, _, _ in enclosures)
    states = [rec.extremal_state for _, rec, _ in enclosures]
    npairs = [(a, b) for a in range(len(states)) for b in range(a + 1, len(states))]
    witness: dict = {}
    magnitude = {pair: 0.0 for pair in npairs}

    frontier = [((), list(states))]
    for _ in range(max_len):
        if all(pair in witness for pair in npairs):
            break
        next_frontier = []
        for word, mats in frontier:
            for s, v in enumerate(channel.kraus):
                new_word = word + (s,)
                evolved = [v @ m @ dagger(v) for m in mats]
                traces = [float(np.trace(m).real) for m in evolved]
                for pair in npairs:
                    gap = abs(traces[pair[0]] - traces[pair[1]])
                    if gap > magnitude[pair]:
                        magnitude[pair] = gap
                    if pair not in witness and gap > tol.residual_tol:
                        witness[pair] = new_word
                next_frontier.append((new_word, evolved))
        frontier = next_frontier

    pairs = []
    for pair in npairs:
        word = witness.get(pair)
        pairs.append(
            PairVerdict(
                a=pair[0],
                b=pair[1],
                separated=word is not None,
                witness="word" + str(list(word)) if word is not None else f"none up to {max_len}",
                magnitude=magnitude[pair],
            )
        )
    return IdentifiabilityReport(
        mode="discrete",
        labels=labels,
        pairs=tuple(pairs),
        overall=all(p.separated for p in pairs),
        hypothesis_violated=report.transient_dimension > 0,
    )


@dataclass(frozen=True)
class UniquenessCrossCheck:
    kind: str
    identifiability: IdentifiabilityReport
    transient_free: bool
    theorem_applicable: bool
    is_unique: bool
    commutation_residuals: tuple[float, ...]
    commutation_checked: bool
    converse_counterexample: bool


def uniqueness_cross_check(
    obj,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
    max_len: int = 6,
    report: DecompositionReport | None = None,
) -> UniquenessCrossCheck:
    """Consistency between identifiability and uniqueness of the decomposition.

    When identifiability passes on a transient-free model the decomposition
    must be unique; a violation raises, since it contradicts the theory and
    signals a numerical or logic fault. For every degenerate family the
    partial isometries must commute with the unraveling operators
    (transient-free case). The converse failing (unique decomposition with
    failing identifiability) is recorded, not an error.
    """
    if report is None:
        report = decompose(obj, seed=seed, tol=tol)
    if isinstance(obj, LindbladModel):
        ident = continuous_identifiability(obj, report, tol)
        unraveling = list(obj.jumps)
    elif isinstance(obj, KrausChannel):
        ident = discrete_identifiability(obj, report, max_len, tol)
        unraveling = list(obj.kraus)
    else:
        raise TypeError(f"cannot cross-check object of type {type(obj).__name__}")

    transient_free = report.transient_dimension == 0
    applicable = ident.overall and transient_free
    if applicable and not report.is_unique:
        raise RuntimeError(
            "identifiability passed on a transient-free model but the decomposition "
            "is not unique; this contradicts the uniqueness theorem"
        )

    residuals = []
    checked = transient_free
    if transient_free:
        for fam in report.families:
            for q in fam.isometries.values():
                for op in unraveling:
                    residuals.append(frob(q @ op - op @ q))
    worst = tuple(residuals)
    converse = (
        report.is_unique
        and not ident.overall
        and len(enumerate_minimal_enclosures(report)) >= 2
    )
    return UniquenessCrossCheck(
        kind=report.kind,
        identifiability=ident,
        transient_free=transient_free,
        theorem_applicable=applicable,
        is_unique=report.is_unique,
        commutation_residuals=worst,
        commutation_checked=checked,
        converse_counterexample=converse,
    )
