"""
Command-line front end for the MacLane homology engine.

Examples:
    python -m src.cli.main q-homology --group "Z/2" --max-degree 1
    python -m src.cli.main hml --ring "Z/2" --coefficients self --max-degree 2 --format json
    python -m src.cli.main additivity --left "Z/2" --right "Z/2" --max-degree 2
    python -m src.cli.main ring-table --size 2 --modulus 2 --output m2f2.json
    python -m src.cli.main selftest
"""

from __future__ import annotations

import argparse
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.cli.cache import ArtifactCache
from src.cli.report import Report, render
from src.cli.selftest import run_selftest
from src.cli.settings import ConfigurationError, EngineSettings, load_settings
from src.engine.abgroup import (
    GroupDomainError,
    RingValidationError,
    SpecParseError,
    bimodule_from_spec,
    group_from_spec,
    matrix_ring_payload,
    normalize_spec,
    ring_from_spec,
)
from src.engine.abop import ABMorphismError
from src.engine.hochschild import ClassicalHochschild, HochschildComplex
from src.engine.intlinalg import (
    ComplexCompatibilityError,
    ComplexWindowError,
    LatticeInclusionError,
    homology_of_fp_complex,
)
from src.engine.qcomplex import DEFAULT_BUDGET, DegreeOutOfRangeError, additivity_report, configure_q_complexes, q_complex

logger = logging.getLogger(__name__)

COMMANDS = ("q-homology", "hml", "hh", "additivity", "selftest", "ring-table")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BUDGET = 2


@dataclass
class ComputationRequest:
    command: str
    spec: str = ""
    coefficients: str = "self"
    right_spec: str = ""
    max_degree: int = 0
    budget: int = DEFAULT_BUDGET
    output_format: str = "text"
    cache_dir: Optional[Path] = None
    workers: int = 1
    normalized: bool = False
    timings: bool = False
    quick: bool = False
    size: int = 2
    modulus: int = 2
    output: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}'. Valid options: {', '.join(COMMANDS)}.")
        if self.max_degree < 0:
            raise ValueError("--max-degree must be non-negative.")
        if self.budget < 1:
            raise ValueError("--budget must be at least 1.")


class EngineRunner:
    """Runs one request against a configured cache."""

    def __init__(self, request: ComputationRequest):
        self.request = request
        self.cache = ArtifactCache(request.cache_dir) if request.cache_dir else None
        configure_q_complexes(budget=request.budget, workers=request.workers, store=self.cache)

    def _input(self) -> Dict[str, Any]:
        request = self.request
        if request.command == "q-homology":
            return {"group": normalize_spec(request.spec), "max_degree": request.max_degree}
        if request.command == "additivity":
            return {"left": normalize_spec(request.spec), "right": normalize_spec(request.right_spec), "max_degree": request.max_degree}
        if request.command == "ring-table":
            return {"size": request.size, "modulus": request.modulus, "output": str(request.output)}
        if request.command == "selftest":
            return {"quick": request.quick}
        return {
            "ring": normalize_spec(request.spec),
            "coefficients": normalize_spec(request.coefficients),
            "max_degree": request.max_degree,
            "normalized": request.normalized,
        }

    def run(self) -> Report:
        handler = getattr(self, "_run_" + self.request.command.replace("-", "_"))
        report = Report(self.request.command, self._input())
        handler(report)
        return report

    # ------------------------------------------------------------------ #
    # Commands

    def _timed_degrees(self, report: Report, compute) -> None:
        for k in range(self.request.max_degree + 1):
            started = time.perf_counter()
            report.degrees.append(k)
            report.groups.append(compute(k).format())
            report.timings_ms.append((time.perf_counter() - started) * 1000)

    def _run_q_homology(self, report: Report) -> None:
        group = group_from_spec(self.request.spec)
        complex_ = q_complex(group).chain_data(self.request.max_degree + 1).fp_complex()
        self._timed_degrees(report, lambda k: homology_of_fp_complex(complex_, k))

    def _run_hml(self, report: Report) -> None:
        ring = ring_from_spec(self.request.spec)
        module = bimodule_from_spec(self.request.coefficients, ring)
        engine = HochschildComplex(ring, module, self.request.budget, self.request.normalized)
        total = engine.total_complex(self.request.max_degree)
        self._timed_degrees(report, total.homology)

    def _run_hh(self, report: Report) -> None:
        ring = ring_from_spec(self.request.spec)
        module = bimodule_from_spec(self.request.coefficients, ring)
        complex_ = ClassicalHochschild(ring, module).complex(self.request.max_degree)
        self._timed_degrees(report, lambda k: homology_of_fp_complex(complex_, k))

    def _run_additivity(self, report: Report) -> None:
        left, right = group_from_spec(self.request.spec), group_from_spec(self.request.right_spec)
        started = time.perf_counter()
        verdicts = additivity_report(left, right, self.request.max_degree, self.request.budget)
        report.timings_ms.append((time.perf_counter() - started) * 1000)
        for verdict in verdicts:
            report.degrees.append(verdict.degree)
            report.groups.append(verdict.target.format())
            report.verdicts.append(verdict.isomorphic)
            report.details.append({
                "degree": verdict.degree,
                "source": verdict.source.format(),
                "target": verdict.target.format(),
                "cone": verdict.cone.format(),
            })

    def _run_selftest(self, report: Report) -> None:
        for result in run_selftest(quick=self.request.quick):
            report.details.append({"name": result.name, "passed": result.passed, "detail": result.detail})
            report.timings_ms.append(result.elapsed_ms)
        report.ok = all(item["passed"] for item in report.details)

    def _run_ring_table(self, report: Report) -> None:
        if self.request.output is None:
            raise ValueError("ring-table needs --output.")
        payload = matrix_ring_payload(self.request.size, self.request.modulus)
        self.request.output.parent.mkdir(parents=True, exist_ok=True)
        self.request.output.write_text(json.dumps(payload, indent=2, sort_keys=True))
        logger.info("Wrote M_%s(Z/%s) table to %s", self.request.size, self.request.modulus, self.request.output)


def run(request: ComputationRequest) -> Report:
    return EngineRunner(request).run()


# ---------------------------------------------------------------------- #
# CLI


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text", help="Output format (default text).")
    common.add_argument("--budget", type=int, help="Maximum enumerated cube functions per degree (default MACLANE_BUDGET or 10^8).")
    common.add_argument("--workers", type=int, help="Processes used to enumerate Q-bases (default MACLANE_WORKERS or 1).")
    common.add_argument("--cache-dir", type=Path, help="Artifact cache directory (default MACLANE_CACHE_DIR or data/cache).")
    common.add_argument("--no-cache", action="store_true", help="Do not read or write the artifact cache.")
    common.add_argument("--timings", action="store_true", help="Include per-degree timings in the output.")
    common.add_argument("--log-level", help="Logging level (default MACLANE_LOG_LEVEL or INFO).")

    parser = argparse.ArgumentParser(description="Exact MacLane homology of finite rings.")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("q-homology", parents=[common], help="Homology of the Q-construction of a finite abelian group.")
    q.add_argument("--group", required=True, help="Group spec, e.g. 'Z/2 x Z/4'.")
    q.add_argument("--max-degree", type=int, default=0)

    for name, text in (("hml", "MacLane homology HML_*(R, M)."), ("hh", "Underived Hochschild homology of the discrete ring.")):
        h = sub.add_parser(name, parents=[common], help=text)
        h.add_argument("--ring", required=True, help="'Z/n' or a ring table JSON file.")
        h.add_argument("--coefficients", default="self", help="'self' or a bimodule table JSON file (default self).")
        h.add_argument("--max-degree", type=int, default=0)
        if name == "hml":
            h.add_argument("--normalized", action="store_true", help="Use the normalized bar complex.")

    a = sub.add_parser("additivity", parents=[common], help="Compare Q(U) + Q(V) with Q(U + V) degree by degree.")
    a.add_argument("--left", required=True)
    a.add_argument("--right", required=True)
    a.add_argument("--max-degree", type=int, default=0)

    s = sub.add_parser("selftest", parents=[common], help="Run the invariant suite.")
    s.add_argument("--quick", action="store_true", help="Smaller parameters for a fast run.")

    r = sub.add_parser("ring-table", parents=[common], help="Write the table of a full matrix ring M_n(Z/p).")
    r.add_argument("--size", type=int, default=2)
    r.add_argument("--modulus", type=int, default=2)
    r.add_argument("--output", type=Path, required=True)
    return parser


def request_from_args(args: argparse.Namespace, settings: EngineSettings) -> ComputationRequest:
    return ComputationRequest(
        command=args.command,
        spec=getattr(args, "group", None) or getattr(args, "ring", None) or getattr(args, "left", None) or "",
        coefficients=getattr(args, "coefficients", "self"),
        right_spec=getattr(args, "right", "") or "",
        max_degree=getattr(args, "max_degree", 0),
        budget=settings.budget,
        output_format=args.format,
        cache_dir=settings.cache_dir if settings.use_cache else None,
        workers=settings.workers,
        normalized=getattr(args, "normalized", False),
        timings=args.timings,
        quick=getattr(args, "quick", False),
        size=getattr(args, "size", 2),
        modulus=getattr(args, "modulus", 2),
        output=getattr(args, "output", None),
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = load_settings().with_overrides(
            budget=args.budget,
            workers=args.workers,
            cache_dir=args.cache_dir,
            log_level=args.log_level.upper() if args.log_level else None,
            use_cache=False if args.no_cache else None,
        )
    except ConfigurationError as exc:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
        logger.error("%s", exc)
        return EXIT_INVALID

    logging.basicConfig(level=getattr(logging, settings.log_level), format="%(asctime)s - %(levelname)s - %(message)s")

    try:
        request = request_from_args(args, settings)
        report = run(request)
    except DegreeOutOfRangeError as exc:
        logger.error("%s", exc)
        return EXIT_BUDGET
    except (SpecParseError, GroupDomainError, RingValidationError, ABMorphismError, ComplexWindowError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    except (ComplexCompatibilityError, LatticeInclusionError) as exc:
        logger.error("Inconsistent chain complex: %s", exc)
        return EXIT_INVALID

    print(render(report, request.output_format, request.timings))
    if request.command == "selftest" and not report.ok:
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    raise SystemExit(main())
