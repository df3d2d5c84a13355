"""Model-file parsing and report serialization.

Model files are JSON documents with a "mode" of "lindblad", "kraus", "rates"
or "qnd". Complex matrices are nested arrays of [re, im] pairs; rate matrices
are plain real arrays. Reports serialize with sorted keys and plain float
repr so identical inputs produce byte-identical documents that round-trip
exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .decomposition import (
    DecompositionReport,
    VerificationRecord,
)
from .identifiability import (
    IdentifiabilityReport,
    QndModel,
    QndUniquenessRecord,
    UniquenessCrossCheck,
)
from .linalg import DEFAULT_TOL, Tolerances
from .oqrw import OqrwTheoremRecord, RateMatrix
from .semigroup import KrausChannel, LindbladModel, ModelDiagnostics

MODES = ("lindblad", "kraus", "rates", "qnd")


class ModelFileError(ValueError):
    """Malformed model document (missing fields, bad pairs); CLI exit 1."""


class ValidationError(ValueError):
    """Well-formed document violating model invariants; CLI exit 2."""


def _require(doc: dict, field: str, path: str = ""):
    if field not in doc:
        raise ModelFileError(f"missing field {path}{field}")
    return doc[field]


def _complex_entry(value, field: str) -> complex:
    ok = (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    )
    if not ok:
        raise ModelFileError(f"field {field}: expected a [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def parse_complex_matrix(data, field: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ModelFileError(f"field {field}: expected a nested array of [re, im] pairs")
    width = len(data[0])
    rows = []
    for i, row in enumerate(data):
        if len(row) != width:
            raise ModelFileError(f"field {field}: row {i} has length {len(row)}, expected {width}")
        rows.append([_complex_entry(v, f"{field}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def parse_real_matrix(data, field: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ModelFileError(f"field {field}: expected a nested array of numbers")
    width = len(data[0])
    rows = []
    for i, row in enumerate(data):
        if len(row) != width:
            raise ModelFileError(f"field {field}: row {i} has length {len(row)}, expected {width}")
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ModelFileError(f"field {field}[{i}][{j}]: expected a number, got {v!r}")
        rows.append([float(v) for v in row])
    return np.array(rows, dtype=float)


def complex_matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def real_matrix_to_json(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


def real_vector_to_json(v: np.ndarray) -> list:
    return [float(x) for x in np.asarray(v, dtype=float)]


@dataclass(frozen=True)
class ParsedModel:
    mode: str
    obj: object
    tolerances: Tolerances
    seed: int | None


def parse_model_document(doc) -> ParsedModel:
    if not isinstance(doc, dict):
        raise ModelFileError("model document must be a JSON object")
    mode = _require(doc, "mode")
    if mode not in MODES:
        raise ModelFileError(f"unknown mode {mode!r}; expected one of {MODES}")
    dim = _require(doc, "dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelFileError(f"dim must be a positive integer, got {dim!r}")

    tolerances = DEFAULT_TOL
    if "tolerances" in doc:
        tol_doc = doc["tolerances"]
        if not isinstance(tol_doc, dict):
            raise ModelFileError("tolerances must be an object")
        known = {"rank_tol", "eig_cluster_tol", "residual_tol", "psd_tol"}
        unknown = set(tol_doc) - known
        if unknown:
            raise ModelFileError(f"unknown tolerance keys {sorted(unknown)}")
        try:
            tolerances = DEFAULT_TOL.replace(**{k: float(v) for k, v in tol_doc.items()})
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad tolerances: {exc}") from None

    seed = None
    if "seed" in doc:
        seed = doc["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ModelFileError(f"seed must be an integer, got {seed!r}")

    def check_dim(mat, field, n):
        if mat.shape != (n, n):
            raise ValidationError(f"field {field} has shape {mat.shape}, expected {(n, n)}")
        return mat

    try:
        if mode == "lindblad":
            h = check_dim(parse_complex_matrix(_require(doc, "hamiltonian"), "hamiltonian"), "hamiltonian", dim)
            jumps_doc = doc.get("jumps", [])
            if not isinstance(jumps_doc, list):
                raise ModelFileError("jumps must be an array of matrices")
            jumps = [
                check_dim(parse_complex_matrix(j, f"jumps[{k}]"), f"jumps[{k}]", dim)
                for k, j in enumerate(jumps_doc)
            ]
            obj = LindbladModel.create(h, jumps, tolerances)
        elif mode == "kraus":
            kraus_doc = _require(doc, "kraus")
            if not isinstance(kraus_doc, list) or not kraus_doc:
                raise ModelFileError("kraus must be a non-empty array of matrices")
            kraus = [
                check_dim(parse_complex_matrix(v, f"kraus[{k}]"), f"kraus[{k}]", dim)
                for k, v in enumerate(kraus_doc)
            ]
            obj = KrausChannel.create(kraus, tolerances)
        elif mode == "rates":
            q = parse_real_matrix(_require(doc, "rates"), "rates")
            if q.shape != (dim, dim):
                raise ValidationError(f"rates has shape {q.shape}, expected {(dim, dim)}")
            obj = RateMatrix.create(q, tolerances)
        else:
            qnd_doc = _require(doc, "qnd")
            if not isinstance(qnd_doc, dict):
                raise ModelFileError("qnd must be an object")
            energies = _require(qnd_doc, "energies", "qnd.")
            if not isinstance(energies, list) or len(energies) != dim:
                raise ModelFileError(f"qnd.energies must be an array of length {dim}")
            for i, e in enumerate(energies):
                if not isinstance(e, (int, float)) or isinstance(e, bool):
                    raise ModelFileError(f"qnd.energies[{i}]: expected a number, got {e!r}")
            amps_doc = _require(qnd_doc, "amplitudes", "qnd.")
            if not isinstance(amps_doc, list):
                raise ModelFileError("qnd.amplitudes must be an array of channel rows")
            if amps_doc:
                amps = parse_complex_matrix(amps_doc, "qnd.amplitudes")
            else:
                amps = np.zeros((0, dim), dtype=complex)
            split = _require(qnd_doc, "split", "qnd.")
            if not isinstance(split, int) or isinstance(split, bool):
                raise ModelFileError(f"qnd.split must be an integer, got {split!r}")
            obj = QndModel.create(np.array(energies, dtype=float), amps, split)
    except (ModelFileError, ValidationError):
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return ParsedModel(mode=mode, obj=obj, tolerances=tolerances, seed=seed)


def load_model_file(path: str) -> ParsedModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from None
    return parse_model_document(doc)


# -- report serialization ----------------------------------------------------

def tolerances_to_dict(tol: Tolerances) -> dict:
    return {k: float(v) for k, v in dataclasses.asdict(tol).items()}


def decomposition_report_to_dict(report: DecompositionReport) -> dict:
    return {
        "kind": report.kind,
        "dim": report.dim,
        "seed": report.seed,
        "tolerances": tolerances_to_dict(report.tolerances),
        "conventions": dict(report.conventions),
        "recurrent_method": report.recurrent_method,
        "is_unique": bool(report.is_unique),
        "transient": {
            "projector": complex_matrix_to_json(report.transient),
            "dimension": report.transient_dimension,
        },
        "recurrent": {
            "projector": complex_matrix_to_json(report.recurrent),
            "dimension": report.recurrent_dimension,
        },
        "max_support_state": complex_matrix_to_json(report.max_support_state),
        "unique_enclosures": [
            {
                "projector": complex_matrix_to_json(rec.projector),
                "dimension": rec.dimension,
                "extremal_state": complex_matrix_to_json(rec.extremal_state),
            }
            for rec in report.unique_enclosures
        ],
        "families": [
            {
                "block_projector": complex_matrix_to_json(fam.block_projector),
                "members": [
                    {
                        "projector": complex_matrix_to_json(rec.projector),
                        "dimension": rec.dimension,
                        "extremal_state": complex_matrix_to_json(rec.extremal_state),
                    }
                    for rec in fam.members
                ],
                "isometries": {
                    f"{a}->{b}": complex_matrix_to_json(q)
                    for (a, b), q in sorted(fam.isometries.items())
                },
            }
            for fam in report.families
        ],
        "residuals": {k: float(v) for k, v in sorted(report.residuals.items())},
    }


def verification_record_to_dict(record: VerificationRecord) -> dict:
    return {
        "ok": bool(record.ok),
        "max_residual": float(record.max_residual),
        "clauses": [
            {"name": c.name, "residual": float(c.residual), "ok": bool(c.ok)}
            for c in record.clauses
        ],
    }


def model_diagnostics_to_dict(diag: ModelDiagnostics) -> dict:
    out = {
        "kind": diag.kind,
        "dim": diag.dim,
        "hermiticity_residual": float(diag.hermiticity_residual),
        "trace_residual": float(diag.trace_residual),
        "ok": bool(diag.ok),
    }
    if diag.choi_min_eigenvalue is not None:
        out["choi_min_eigenvalue"] = float(diag.choi_min_eigenvalue)
    return out


def identifiability_report_to_dict(report: IdentifiabilityReport) -> dict:
    return {
        "mode": report.mode,
        "labels": list(report.labels),
        "overall": bool(report.overall),
        "hypothesis_violated": report.hypothesis_violated,
        "policy": report.policy,
        "pairs": [
            {
                "a": p.a,
                "b": p.b,
                "separated": bool(p.separated),
                "witness": p.witness,
                "magnitude": float(p.magnitude),
            }
            for p in report.pairs
        ],
    }


def qnd_uniqueness_to_dict(record: QndUniquenessRecord) -> dict:
    return {
        "nondegenerate": record.nondegenerate,
        "re_omega": {f"{a}->{b}": v for (a, b), v in sorted(record.re_omega.items())},
        "omega_all_negative": record.omega_all_negative,
        "decomposition_unique": record.decomposition_unique,
        "pointer_enclosures": record.pointer_enclosures,
        "diagonal_fixed_points_residual": record.diagonal_fixed_points_residual,
        "consistent": bool(record.consistent),
    }


def cross_check_to_dict(record: UniquenessCrossCheck) -> dict:
    return {
        "kind": record.kind,
        "identifiability": identifiability_report_to_dict(record.identifiability),
        "transient_free": record.transient_free,
        "theorem_applicable": record.theorem_applicable,
        "is_unique": record.is_unique,
        "commutation_checked": record.commutation_checked,
        "commutation_residuals": [float(r) for r in record.commutation_residuals],
        "converse_counterexample": record.converse_counterexample,
    }


def oqrw_record_to_dict(record: OqrwTheoremRecord) -> dict:
    return {
        "seed": record.seed,
        "convention": record.convention,
        "classes": [list(c) for c in record.classes],
        "invariant_measures": [real_vector_to_json(m) for m in record.measures],
        "zero_diagonal_states": list(record.zero_diagonal_states),
        "passed": bool(record.passed),
        "clauses": [
            {"name": c.name, "residual": float(c.residual), "ok": bool(c.ok)}
            for c in record.clauses
        ],
    }


def serialize_report(doc: dict) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, newline end."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def parse_report(text: str) -> dict:
    return json.loads(text)
