"""
Command-line front end.

    forge build torus44:8 --out m.json
    forge build xi --rank 4 --I 1,2 --variant xiprime --out xi.json
    forge verify --suite main
    forge verify --premaniplex xi.json --voltage xi.json
    forge export stg torus44:4

Every command returns an exit code: 0 success, 1 negative verdict,
2 refused by a size guard, 3 malformed input, 4 internal error.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from pydantic import TypeAdapter, ValidationError

from src.models.config import ForgeSettings
from src.models.group import GroupElementDocument
from src.models.maniplex import Maniplex, ManiplexDocument
from src.models.premaniplex import Premaniplex, PremaniplexDocument, VoltageAssignment
from src.models.report import OracleStatus, SuiteReport, Verdict
from src.services.constants import (
    EXIT_INFEASIBLE,
    EXIT_INPUT_ERROR,
    EXIT_INTERNAL_ERROR,
    EXIT_NEGATIVE,
    EXIT_OK,
    KNIGHT_WORD,
    MAIN_SEMI_COLORS,
)
from src.services.constructions import (
    cuboctahedron,
    eta_knight,
    is_facet_separating,
    one_cell_torus,
    rhombic_dodecahedron,
    square_flag_graph,
    torus_map_44,
)
from src.services.exceptions import (
    ColorRangeError,
    ConstructionError,
    InfeasibleError,
    PreconditionError,
    StructureError,
)
from src.services.flagcore import validate_maniplex
from src.services.hat2 import Hat2Maniplex, check_hat_s_asymmetric, check_hat_s_spread, find_s3, hat2, hat_S, verify_s3
from src.services.polytopality import cross_validate, run_lemma_suite, run_main_suite, run_oracle_suite, verify_polytopal
from src.services.poset import is_polytope
from src.services.symmetry import automorphisms, derived_orbit_bound, symmetry_type_graph, to_dot
from src.services.utils import is_involution
from src.services.voltage import build_2nI
from src.services.xi import build_rank4_pipeline
from src.utils.config import load_settings
from src.utils.logging import bind_run_context, log_exception, logger

Command = Callable[[argparse.Namespace, ForgeSettings], int]

SUITES: Dict[str, Callable[[ForgeSettings], SuiteReport]] = {
    "main": run_main_suite,
    "lemmas": lambda settings: run_lemma_suite(settings=settings),
    "oracle": run_oracle_suite,
}

_VOLTAGES = TypeAdapter(Dict[str, GroupElementDocument])


def parse_colors(text: str) -> Tuple[int, ...]:
    """``"1,2"`` -> ``(1, 2)``; the empty string is the empty set."""
    try:
        return tuple(sorted({int(part) for part in text.split(",") if part.strip()}))
    except ValueError as e:
        raise StructureError(f"Colors must be a comma separated list of integers, got {text!r}") from e


def resolve_maniplex(name: str, settings: ForgeSettings) -> Maniplex:
    """
    Build a named maniplex or read one from a JSON file.

    Names: ``square``, ``torus44:<s>``, ``cuboctahedron``,
    ``rhombic-dodecahedron``, ``hat2:<name>`` and paths ending in ``.json``.

    Raises:
        StructureError: For unknown names and malformed files
    """
    if name == "square":
        return square_flag_graph()
    if name == "cuboctahedron":
        return cuboctahedron()
    if name == "rhombic-dodecahedron":
        return rhombic_dodecahedron()
    if name.startswith("torus44:"):
        try:
            s = int(name.split(":", 1)[1])
        except ValueError as e:
            raise StructureError(f"Torus size must be an integer in {name!r}") from e
        return one_cell_torus() if s == 1 else torus_map_44(s)
    if name.startswith("hat2:"):
        doubled = hat2(resolve_maniplex(name.split(":", 1)[1], settings), materialize=True, settings=settings)
        assert isinstance(doubled, Maniplex)
        return doubled
    if name.endswith(".json"):
        return load_maniplex(Path(name))
    raise StructureError(f"Unknown maniplex {name!r}")


def _read_json(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise StructureError(f"Cannot read {path}: {e}") from e


def load_maniplex(path: Path) -> Maniplex:
    return Maniplex.from_document(ManiplexDocument.model_validate(_read_json(path)))


def load_premaniplex(path: Path) -> Premaniplex:
    """Read a premaniplex file, or the ``premaniplex`` part of a ``build xi`` file."""
    data = _read_json(path)
    if isinstance(data, dict) and "premaniplex" in data:
        data = data["premaniplex"]
    return Premaniplex.from_document(PremaniplexDocument.model_validate(data))


def load_voltages(path: Path) -> VoltageAssignment:
    """Read a voltage file, or the ``voltages`` part of a ``build xi`` file."""
    data = _read_json(path)
    if isinstance(data, dict) and "voltages" in data:
        data = data["voltages"]
    return VoltageAssignment.from_document(_VOLTAGES.validate_python(data))


def premaniplex_payload(X: Premaniplex, xi: VoltageAssignment) -> Dict[str, Any]:
    return {
        "premaniplex": X.to_document().model_dump(mode="json", by_alias=True, exclude_none=True),
        "voltages": {key: doc.model_dump(mode="json") for key, doc in xi.to_document().items()},
    }


def emit(payload: Any, out: Optional[Path]) -> None:
    """Write JSON or text to ``out``, or to stdout."""
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StructureError(f"Cannot write {out}: {e}") from e
    logger.info("Artifact written", extra={"path": str(out), "bytes": len(text)})


def summary(message: str) -> None:
    """Human-readable line on stderr, next to the JSON on stdout."""
    print(message, file=sys.stderr)


def _build_s3(args: argparse.Namespace, settings: ForgeSettings) -> int:
    M = resolve_maniplex(args.base or "torus44:4", settings)
    aut = automorphisms(M, jobs=settings.jobs)
    S = find_s3(M, aut)
    if S is None:
        emit({"base": args.base or "torus44:4", "facets": None}, args.out)
        summary("no asymmetric facet set")
        return EXIT_NEGATIVE
    check = verify_s3(M, S, aut)
    H = hat2(M)
    assert isinstance(H, Hat2Maniplex)
    hat_asymmetric = check_hat_s_asymmetric(H, S, aut)
    hat_spread = check_hat_s_spread(H, S)
    emit({
        "base": args.base or "torus44:4",
        "automorphisms": aut.order(),
        "facets": list(S),
        "checks": {"asymmetric": check.asymmetric, "spread": check.spread},
        # facet vectors as integer masks over the base facets
        "doubled": {"facets": list(hat_S(S)), "asymmetric": hat_asymmetric, "spread": hat_spread},
    }, args.out)
    passed = check.passed and hat_asymmetric and hat_spread
    summary(f"facet set {list(S)}: {'verified' if passed else 'check failed'}")
    return EXIT_OK if passed else EXIT_NEGATIVE


def _build_eta(args: argparse.Namespace, settings: ForgeSettings) -> int:
    M = resolve_maniplex(args.base or "torus44:8", settings)
    eta = eta_knight(M)
    emit({
        "base": args.base or "torus44:8",
        "word": list(KNIGHT_WORD),
        "perm": eta.tolist(),
        "involution": is_involution(eta),
        "facet_separating": is_facet_separating(M, eta),
    }, args.out)
    summary(f"knight monodromy on {M.num_flags} flags")
    return EXIT_OK


def _build_xi(args: argparse.Namespace, settings: ForgeSettings) -> int:
    if args.rank != 4:
        raise ColorRangeError(f"The voltage construction is built at rank 4, got --rank {args.rank}")
    colors = parse_colors(args.I) if args.I is not None else MAIN_SEMI_COLORS
    pipeline = build_rank4_pipeline(colors, settings)
    xi = pipeline.voltages(args.variant)
    payload = premaniplex_payload(pipeline.premaniplex, xi)
    payload["variant"] = args.variant
    emit(payload, args.out)
    summary(f"{args.variant} on 2^{args.rank}_{list(pipeline.semi_colors)}, voltages on {xi.degree} points")
    return EXIT_OK


def _build_command(args: argparse.Namespace, settings: ForgeSettings) -> int:
    builders: Dict[str, Command] = {"s3": _build_s3, "eta": _build_eta, "xi": _build_xi}
    if args.name in builders:
        return builders[args.name](args, settings)
    M = resolve_maniplex(args.name, settings)
    emit(M.to_document().model_dump(mode="json"), args.out)
    summary(f"{args.name}: rank {M.rank}, {M.num_flags} flags")
    return EXIT_OK


def _verify_suite(args: argparse.Namespace, settings: ForgeSettings) -> int:
    report = SUITES[args.suite](settings)
    emit(report.model_dump(mode="json"), args.out)
    failed = [check.name for check in report.checks if not check.passed]
    summary(f"suite {args.suite}: {len(report.checks) - len(failed)}/{len(report.checks)} passed")
    for name in failed:
        summary(f"  failed: {name}")
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def _verify_maniplex(args: argparse.Namespace, settings: ForgeSettings) -> int:
    M = load_maniplex(args.maniplex)
    validation = validate_maniplex(M)
    payload: Dict[str, Any] = {"validation": validation.model_dump(mode="json")}
    code = EXIT_OK if validation.is_valid else EXIT_NEGATIVE
    if validation.is_valid and args.oracle:
        oracle = is_polytope(M, settings)
        payload["oracle"] = oracle.model_dump(mode="json")
        if oracle.status == OracleStatus.INFEASIBLE:
            code = EXIT_INFEASIBLE
        elif not oracle.is_polytope:
            code = EXIT_NEGATIVE
    emit(payload, args.out)
    verdict = payload.get("oracle", {}).get("status", "valid" if validation.is_valid else "invalid")
    summary(f"maniplex with {M.num_flags} flags: {verdict}")
    return code


def _verify_voltages(args: argparse.Namespace, settings: ForgeSettings) -> int:
    X = load_premaniplex(args.premaniplex)
    xi = load_voltages(args.voltage)
    xi.check_inverses(X)
    verdict = verify_polytopal(X, xi, settings)
    payload: Dict[str, Any] = {"verdict": verdict.model_dump(mode="json")}
    codes = {
        Verdict.POLYTOPAL: EXIT_OK,
        Verdict.NOT_MANIPLEX: EXIT_NEGATIVE,
        Verdict.NOT_POLYTOPAL: EXIT_NEGATIVE,
        Verdict.INFEASIBLE: EXIT_INFEASIBLE,
    }
    code = codes[verdict.verdict]
    if args.oracle:
        cross = cross_validate(X, xi, settings)
        payload["cross_validation"] = cross.model_dump(mode="json")
        if cross.agree is False:
            code = EXIT_NEGATIVE
    emit(payload, args.out)
    summary(f"{verdict.verdict.value}" + (f": {verdict.witness}" if verdict.witness else ""))
    return code


def _verify_command(args: argparse.Namespace, settings: ForgeSettings) -> int:
    if args.suite:
        return _verify_suite(args, settings)
    if args.maniplex:
        return _verify_maniplex(args, settings)
    if args.premaniplex and args.voltage:
        return _verify_voltages(args, settings)
    raise StructureError("verify needs --suite, --maniplex, or --premaniplex with --voltage")


def _export_stg(args: argparse.Namespace, settings: ForgeSettings) -> str:
    if args.target == "xi":
        pipeline = build_rank4_pipeline(parse_colors(args.I) if args.I is not None else MAIN_SEMI_COLORS, settings)
        X = pipeline.premaniplex
        bound = derived_orbit_bound(X, pipeline.voltages(args.variant), settings.oracle_cap)
        if bound.lower != X.num_vertices:
            raise InfeasibleError(
                f"Orbit count of the derived maniplex is between {bound.lower} and {bound.upper}",
                limit=bound.lower,
                required=bound.upper,
            )
        return to_dot(X, name=f"stg_{args.variant}")
    M = resolve_maniplex(args.target, settings)
    return to_dot(symmetry_type_graph(M, automorphisms(M, jobs=settings.jobs)), name=f"stg_{args.target}")


def _export_premaniplex(args: argparse.Namespace, settings: ForgeSettings) -> str:
    if args.target.startswith("2nI:"):
        parts = args.target.split(":")
        if len(parts) != 3:
            raise StructureError(f"Expected 2nI:<n>:<colors>, got {args.target!r}")
        try:
            n = int(parts[1])
        except ValueError as e:
            raise StructureError(f"Rank must be an integer in {args.target!r}") from e
        return to_dot(build_2nI(n, parse_colors(parts[2])), name=f"premaniplex_2_{n}")
    return to_dot(load_premaniplex(Path(args.target)), name="premaniplex")


def _export_command(args: argparse.Namespace, settings: ForgeSettings) -> int:
    exporters: Dict[str, Callable[[argparse.Namespace, ForgeSettings], str]] = {
        "stg": _export_stg,
        "premaniplex": _export_premaniplex,
    }
    emit(exporters[args.kind](args, settings), args.out)
    return EXIT_OK


def _add_build_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "name",
        help="square, torus44:<s>, cuboctahedron, rhombic-dodecahedron, hat2:<name>, s3, eta or xi",
    )
    parser.add_argument("--base", default=None, help="Base maniplex for s3 (torus44:4) and eta (torus44:8)")
    parser.add_argument("--rank", type=int, default=4, help="Rank of the voltage construction (default: 4)")
    parser.add_argument("--I", dest="I", default=None, help="Semi-edge colors, comma separated (default: 1,2)")
    parser.add_argument("--variant", choices=("xi", "xiprime"), default="xi", help="Voltage variant")
    parser.add_argument("--out", type=Path, default=None, help="Output JSON path (default: stdout)")
    parser.set_defaults(func=_build_command)


def _add_verify_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--suite", choices=tuple(SUITES), default=None, help="Run a named verification suite")
    parser.add_argument("--maniplex", type=Path, default=None, help="Maniplex JSON to validate")
    parser.add_argument("--premaniplex", type=Path, default=None, help="Premaniplex JSON")
    parser.add_argument("--voltage", type=Path, default=None, help="Voltage assignment JSON")
    parser.add_argument("--oracle", action="store_true", help="Also run the face-poset oracle")
    parser.add_argument("--out", type=Path, default=None, help="Output JSON path (default: stdout)")
    parser.set_defaults(func=_verify_command)


def _add_export_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("kind", choices=("stg", "premaniplex"))
    parser.add_argument("target", help="Maniplex name or xi for stg; 2nI:<n>:<colors> or JSON for premaniplex")
    parser.add_argument("--I", dest="I", default=None, help="Semi-edge colors of xi (default: 1,2)")
    parser.add_argument("--variant", choices=("xi", "xiprime"), default="xi", help="Voltage variant of xi")
    parser.add_argument("--out", type=Path, default=None, help="Output DOT path (default: stdout)")
    parser.set_defaults(func=_export_command)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description="Maniplex constructions and polytopality checks")
    parser.add_argument("--config", type=Path, default=None, help="TOML settings file")
    parser.add_argument("--seed", type=int, default=None, help="PRNG seed (overrides FORGE_SEED)")
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads (0: available cores)")
    parser.add_argument("--oracle-cap", type=int, default=None, help="Largest flag count for the poset oracle")
    parser.add_argument("--sample-paths", type=int, default=None, help="Random paths per property check")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_build_args(sub.add_parser("build", help="Build a named object and write it as JSON"))
    _add_verify_args(sub.add_parser("verify", help="Run a suite or check input files"))
    _add_export_args(sub.add_parser("export", help="Write DOT for symmetry type graphs and premaniplexes"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``forge`` console script.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(
            path=args.config,
            overrides={
                "seed": args.seed,
                "jobs": args.jobs,
                "oracle_cap": args.oracle_cap,
                "sample_paths": args.sample_paths,
            },
        )
        bind_run_context(settings.seed, args.command)
        logger.info("Command started", extra={"command": args.command, "settings": settings.model_dump()})
        code: int = args.func(args, settings)
        logger.info("Command finished", extra={"command": args.command, "exit_code": code})
        return code
    except InfeasibleError as e:
        log_exception(logger, "Size guard refused the request", extra={
            "error": str(e),
            "error_type": type(e).__name__,
            "limit": e.limit,
            "required": e.required,
        })
        summary(f"infeasible: {e}")
        return EXIT_INFEASIBLE
    except (StructureError, ValidationError) as e:
        log_exception(logger, "Invalid input", extra={"error": str(e), "error_type": type(e).__name__})
        summary(f"input error: {e}")
        return EXIT_INPUT_ERROR
    except (ConstructionError, PreconditionError) as e:
        log_exception(logger, "Construction precondition failed", extra={"error": str(e), "error_type": type(e).__name__})
        summary(f"error: {e}")
        return EXIT_NEGATIVE
    except Exception as e:
        logger.exception("Unexpected failure", extra={"error": str(e), "error_type": type(e).__name__})
        summary(f"internal error: {type(e).__name__}: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
