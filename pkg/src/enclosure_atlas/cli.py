"""Command-line front end.

Subcommands: ``analyze`` (decomposition + verification), ``oqrw`` (classical
cross-validation of a rate matrix), ``identifiability`` (continuous, discrete
or nondemolition checks), ``examples`` (emit a built-in model file).

Exit codes are a stable contract: 0 success, 1 file/parse error,
2 validation failure, 3 analysis failure (including failed theorem clauses
or failed identifiability). The seed defaults to --seed, then the model
file's "seed", then the ENCLOSURE_ATLAS_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .decomposition import DecompositionError, decompose, verify_decomposition
from .fixtures import FIXTURES, fixture_document
from .identifiability import (
    QndModel,
    continuous_identifiability,
    discrete_identifiability,
    nondegeneracy_check,
    qnd_uniqueness,
    uniqueness_cross_check,
)
from .io import (
    ModelFileError,
    ParsedModel,
    ValidationError,
    cross_check_to_dict,
    decomposition_report_to_dict,
    identifiability_report_to_dict,
    load_model_file,
    model_diagnostics_to_dict,
    oqrw_record_to_dict,
    qnd_uniqueness_to_dict,
    serialize_report,
    tolerances_to_dict,
    verification_record_to_dict,
)
from .oqrw import RateMatrix, verify_oqrw_theorem
from .semigroup import KrausChannel, LindbladModel, validate

ENV_SEED = "ENCLOSURE_ATLAS_SEED"


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=None, help="seed for generic sampling")
    parser.add_argument("--tol-rank", type=float, default=None, help="override rank_tol")
    parser.add_argument(
        "--tol-residual", type=float, default=None, help="override residual_tol"
    )
    parser.add_argument(
        "--format",
        choices=("text", "structured"),
        default="text",
        help="human-readable text or deterministic JSON",
    )
    parser.add_argument("-o", "--output", default=None, help="write the report to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enclosure-atlas",
        description="Decompose Lindblad generators and quantum channels into "
        "transient subspace, minimal enclosures, and degenerate families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decompose a lindblad or kraus model file")
    p.add_argument("paths", nargs="+", metavar="MODEL")
    p.add_argument(
        "--batch", action="store_true", help="process several files concurrently"
    )
    _add_common_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oqrw", help="cross-validate a rate-matrix walk classically")
    p.add_argument("path", metavar="MODEL")
    _add_common_flags(p)
    p.set_defaults(func=cmd_oqrw)

    p = sub.add_parser("identifiability", help="identifiability / non-degeneracy checks")
    p.add_argument("path", metavar="MODEL")
    p.add_argument(
        "--mode",
        choices=("auto", "continuous", "discrete", "qnd"),
        default="auto",
    )
    p.add_argument("--max-len", type=int, default=6, help="longest outcome word searched")
    _add_common_flags(p)
    p.set_defaults(func=cmd_identifiability)

    p = sub.add_parser("examples", help="emit a built-in example model file")
    p.add_argument("name", metavar="NAME")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_examples)
    return parser


def _resolve_seed(args, parsed: ParsedModel) -> int:
    if args.seed is not None:
        return args.seed
    if parsed.seed is not None:
        return parsed.seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{ENV_SEED}={env!r} is not an integer") from None
    return 0


def _resolve_tol(args, parsed: ParsedModel):
    tol = parsed.tolerances
    if args.tol_rank is not None:
        tol = tol.replace(rank_tol=args.tol_rank)
    if args.tol_residual is not None:
        tol = tol.replace(residual_tol=args.tol_residual)
    return tol


def _emit(args, doc: dict, text: str) -> None:
    payload = serialize_report(doc) if args.format == "structured" else text
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _shape_line(report_dict: dict) -> str:
    parts = [f"D({report_dict['transient']['dimension']})"]
    for i, rec in enumerate(report_dict["unique_enclosures"]):
        parts.append(f"V{i}({rec['dimension']})")
    for b, fam in enumerate(report_dict["families"]):
        members = " ~ ".join(
            f"V{b}.{g}({m['dimension']})" for g, m in enumerate(fam["members"])
        )
        parts.append(f"[{members}]")
    return f"H({report_dict['dim']}) = " + " (+) ".join(parts)


def _analyze_one(path: str, args, seed_offset: int = 0) -> tuple[int, dict, str]:
    parsed = load_model_file(path)
    if parsed.mode not in ("lindblad", "kraus"):
        raise ValidationError(f"analyze expects a lindblad or kraus model, got {parsed.mode!r}")
    tol = _resolve_tol(args, parsed)
    seed = _resolve_seed(args, parsed) + seed_offset
    diagnostics = validate(parsed.obj, tol)
    report = decompose(parsed.obj, seed=seed, tol=tol)
    verification = verify_decomposition(report, parsed.obj, tol)
    doc = {
        "model_diagnostics": model_diagnostics_to_dict(diagnostics),
        "decomposition": decomposition_report_to_dict(report),
        "verification": verification_record_to_dict(verification),
    }
    lines = [
        f"model: {parsed.mode} dim={report.dim} seed={seed}",
        "decomposition: " + _shape_line(doc["decomposition"]),
        f"recurrent method: {report.recurrent_method}",
        f"unique decomposition: {report.is_unique}",
        f"verification: {'ok' if verification.ok else 'FAILED'}"
        f" (max residual {verification.max_residual:.3e})",
    ]
    return 0, doc, "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    if len(args.paths) > 1 and not args.batch:
        raise ValidationError("multiple model files require --batch")
    if not args.batch:
        code, doc, text = _analyze_one(args.paths[0], args)
        _emit(args, doc, text)
        return code

    def run(item):
        index, path = item
        try:
            return path, _analyze_one(path, args, seed_offset=index)
        except ModelFileError as exc:
            return path, (1, {"error": str(exc)}, f"error: {exc}\n")
        except (ValidationError, ValueError) as exc:
            return path, (2, {"error": str(exc)}, f"validation error: {exc}\n")
        except (DecompositionError, RuntimeError) as exc:
            return path, (3, {"error": str(exc)}, f"analysis error: {exc}\n")

    with ThreadPoolExecutor(max_workers=min(8, len(args.paths))) as pool:
        results = list(pool.map(run, enumerate(args.paths)))
    doc = {"reports": {path: payload[1] for path, payload in results}}
    text = "".join(
        f"== {path} ==\n{payload[2]}" for path, payload in results
    )
    _emit(args, doc, text)
    return max(payload[0] for _, payload in results)


def cmd_oqrw(args) -> int:
    parsed = load_model_file(args.path)
    if parsed.mode != "rates":
        raise ValidationError(f"oqrw expects a rates model, got {parsed.mode!r}")
    assert isinstance(parsed.obj, RateMatrix)
    tol = _resolve_tol(args, parsed)
    seed = _resolve_seed(args, parsed)
    record = verify_oqrw_theorem(parsed.obj, seed=seed, tol=tol)
    doc = {"oqrw": oqrw_record_to_dict(record), "tolerances": tolerances_to_dict(tol)}
    lines = [
        f"closed classes: {[list(c) for c in record.classes]}",
        f"invariant measures: {[list(map(float, m.round(12))) for m in record.measures]}",
        f"zero-diagonal states: {list(record.zero_diagonal_states)}",
    ]
    for clause in record.clauses:
        lines.append(
            f"  {'PASS' if clause.ok else 'FAIL'} {clause.name} (residual {clause.residual:.3e})"
        )
    lines.append(f"overall: {'pass' if record.passed else 'fail'}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return 0 if record.passed else 3


def _identifiability_text(doc: dict) -> str:
    rep = doc["identifiability"]
    lines = [f"mode: {rep['mode']}", f"labels: {rep['labels']}"]
    for p in rep["pairs"]:
        status = "separated" if p["separated"] else "NOT separated"
        lines.append(
            f"  ({p['a']},{p['b']}) {status}; witness={p['witness']}"
            f" magnitude={p['magnitude']:.3e}"
        )
    if rep["hypothesis_violated"]:
        lines.append("note: transient part present; uniqueness hypothesis violated")
    lines.append(f"overall: {'pass' if rep['overall'] else 'fail'}")
    return "\n".join(lines) + "\n"


def cmd_identifiability(args) -> int:
    parsed = load_model_file(args.path)
    mode = args.mode
    if mode == "auto":
        mode = {"lindblad": "continuous", "kraus": "discrete", "qnd": "qnd"}.get(parsed.mode)
        if mode is None:
            raise ValidationError(f"no identifiability mode for a {parsed.mode!r} model")
    tol = _resolve_tol(args, parsed)
    seed = _resolve_seed(args, parsed)

    if mode == "qnd":
        if not isinstance(parsed.obj, QndModel):
            raise ValidationError("qnd identifiability expects a qnd model file")
        report = nondegeneracy_check(parsed.obj, tol)
        record = qnd_uniqueness(parsed.obj, tol, seed)
        doc = {
            "identifiability": identifiability_report_to_dict(report),
            "qnd_uniqueness": qnd_uniqueness_to_dict(record),
        }
        _emit(args, doc, _identifiability_text(doc))
        return 0 if report.overall else 3

    if mode == "continuous" and not isinstance(parsed.obj, LindbladModel):
        raise ValidationError("continuous identifiability expects a lindblad model file")
    if mode == "discrete" and not isinstance(parsed.obj, KrausChannel):
        raise ValidationError("discrete identifiability expects a kraus model file")
    report = decompose(parsed.obj, seed=seed, tol=tol)
    if mode == "continuous":
        ident = continuous_identifiability(parsed.obj, report, tol)
    else:
        ident = discrete_identifiability(parsed.obj, report, args.max_len, tol)
    cross = uniqueness_cross_check(
        parsed.obj, seed=seed, tol=tol, max_len=args.max_len, report=report
    )
    doc = {
        "identifiability": identifiability_report_to_dict(ident),
        "uniqueness_cross_check": cross_check_to_dict(cross),
    }
    _emit(args, doc, _identifiability_text(doc))
    return 0 if ident.overall else 3


def cmd_examples(args) -> int:
    try:
        doc = fixture_document(args.name)
    except KeyError:
        known = ", ".join(sorted(FIXTURES))
        sys.stderr.write(f"unknown example {args.name!r}; available: {known}\n")
        return 2
    payload = serialize_report(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFileError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ValidationError, ValueError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    except (DecompositionError, RuntimeError) as exc:
        sys.stderr.write(f"analysis error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
