import argparse
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Dict, List, Optional

from modular_spans import ModularSpans, RunConfig
from modular_spans.constants import (
    CERT_POLICIES,
    EXIT_CACHE_CORRUPT,
    EXIT_CERTIFICATION_FAILED,
    EXIT_CHECK_FAILED,
    EXIT_INVALID_CONFIG,
    EXIT_OK,
    OUTPUT_FORMATS,
)
from modular_spans.cusps import RELATIONS
from modular_spans.errors import (
    CacheCorruptError,
    CertificationError,
    ConfigError,
    ModularSpansError,
    TruncationError,
)
from modular_spans.report import (
    CHECKS_HEADER,
    CUSPS_HEADER,
    FORMULAS_HEADER,
    check_rows,
    cusp_rows,
    formula_rows,
    render_reports,
    render_rows,
)

logger = logging.getLogger("modular_spans.main")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _primes(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated primes, got {text!r}"
        )


def _common_options() -> argparse.ArgumentParser:
    # defaults stay None so environment overrides can fill them in
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--p", type=int, help="odd prime level")
    parent.add_argument("--p-list", type=_primes, help="comma-separated primes")
    parent.add_argument("--kmax", dest="k_max", type=int, help="largest weight k")
    parent.add_argument("--L", dest="length", type=int, help="truncation override")
    parent.add_argument(
        "--allow-unsound",
        action="store_true",
        default=None,
        help="accept L below the truncation bound; output is marked UNSOUND",
    )
    parent.add_argument(
        "--cert", choices=CERT_POLICIES, help="rank certification policy"
    )
    parent.add_argument(
        "--prime-bits", type=int, help="bit size of certification primes"
    )
    parent.add_argument("--threads", type=int, help="worker processes")
    parent.add_argument("--seed", type=int, help="seed for prime selection")
    parent.add_argument("--cache-dir", help="directory for cached generators and bases")
    parent.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS)
    parent.add_argument("--out", help="also write the output to this file")
    parent.add_argument("--no-cap", action="store_true", default=None)
    parent.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modular-spans",
        description=(
            "Dimensions of products of weight-1 forms pulled back "
            "from X(4) to X(4p)."
        ),
    )
    parser.add_argument("--version", action="store_true", help="Display the version")
    commands = parser.add_subparsers(dest="command")
    common = _common_options()

    dims = commands.add_parser("dims", parents=[common], help="dim W_k for k = 1..kmax")
    dims.add_argument("--timings", action="store_true", default=None)
    dims.add_argument(
        "--relations",
        action="store_true",
        default=None,
        help="report degree-k relations",
    )
    dims.add_argument(
        "--verify-relations",
        action="store_true",
        default=None,
        help="certify relations on small blocks over the integers",
    )
    table1 = commands.add_parser(
        "table1", parents=[common], help="the multi-p dimension grid"
    )
    table1.add_argument("--timings", action="store_true", default=None)
    cusps = commands.add_parser("cusps", parents=[common], help="cusp class tables")
    cusps.add_argument("--relation", choices=RELATIONS)
    commands.add_parser("verify", parents=[common], help="run the invariant checks")
    commands.add_parser(
        "formulas", parents=[common], help="bound and dimension formulas"
    )
    return parser


def _options(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "version", "verbose"}
    return {name: value for name, value in vars(args).items() if name not in skip}


def _emit(text: str, out: Optional[str]) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def run(args: argparse.Namespace) -> int:
    config: RunConfig = ModularSpans.parse_config(_options(args))
    spans = ModularSpans(config)
    fmt = config.output_format
    status = EXIT_OK

    if args.command == "dims":
        report = spans.dims()
        text = render_reports([report], fmt, config.k_max, "dims", config.timings)
    elif args.command == "table1":
        reports = spans.table1()
        text = render_reports(reports, fmt, config.k_max, "table1", config.timings)
    elif args.command == "cusps":
        text = render_rows(CUSPS_HEADER, cusp_rows(spans.cusps()), fmt, "cusps")
    elif args.command == "formulas":
        k_max = max(config.k_max, 2)
        rows = formula_rows(config.primes, k_max)
        text = render_rows(FORMULAS_HEADER, rows, fmt, "formulas", {"k_max": k_max})
    else:
        results = spans.verify()
        passed = all(result.passed for result in results)
        text = render_rows(
            CHECKS_HEADER, check_rows(results), fmt, "verify", {"passed": passed}
        )
        if not passed:
            failed = ", ".join(result.name for result in results if not result.passed)
            logger.error(f"Failed checks: {failed}")
            status = EXIT_CHECK_FAILED

    _emit(text, config.out)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.version:
        try:
            print(f"Version {version('modular_spans')}")
        except PackageNotFoundError:
            print(
                "Package not found. Make sure it's installed and pyproject.toml is properly configured."
            )
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INVALID_CONFIG

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
    )

    try:
        return run(args)
    except (ConfigError, TruncationError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID_CONFIG
    except CertificationError as e:
        logger.error(f"Certification failed: {e}")
        return EXIT_CERTIFICATION_FAILED
    except CacheCorruptError as e:
        logger.error(f"Cache is corrupt: {e}")
        return EXIT_CACHE_CORRUPT
    except ModularSpansError as e:
        logger.error(f"Check failed: {e}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
