"""
Command-line front end.

    analyze           conditions of every element of a mesh file, plus the face-to-face check
    generate          a family (members side by side) or the Kuhn cube as a mesh file
    study             CSV report of a family along its eps schedule, with trend verdicts
    check-identities  randomized identity suite for sin_d
    interp-study      interpolation errors of the quadratic suite along a family

Exit status: 0 pass, 1 condition violation, 2 usage or input error.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, fields

from maxangle.conditions import DEFAULT_THRESHOLDS, Thresholds
from maxangle.errors import MaxAngleError
from maxangle.families import FAMILY_NAMES, FamilySpec, generate_family, geometric_schedule
from maxangle.interpolation import DEFAULT_LATTICE_ORDER
from maxangle.meshes import (
    analyze_mesh,
    face_to_face_check,
    family_mesh,
    get_available_solvers,
    kuhn_mesh,
    parse_mesh,
    serialize_mesh,
)
from maxangle.studies import (
    equivalence_verdicts,
    identity_results_as_dict,
    interpolation_rows_to_csv,
    run_family_study,
    run_identity_suite,
    run_interpolation_study,
)

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "generate", "study", "check-identities", "interp-study")
FORMATS = ("text", "csv", "json")
# exhaustive edge searches stay desk-scale up to this dimension
MAX_DIM = 6
DEFAULT_SCHEDULE = "0.5,0.5,20"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2


class ConfigError(MaxAngleError, ValueError):
    """Raised for command-line settings that cannot be run."""


def parse_schedule(text: str) -> tuple[float, ...]:
    """'start,factor,count' -> the geometric eps schedule it describes."""
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"schedule must be 'start,factor,count', got '{text}'")
    try:
        start, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"schedule must be 'start,factor,count', got '{text}'") from None
    if count < 1:
        raise ConfigError(f"schedule count must be >= 1, got {count}")
    return geometric_schedule(start, factor, count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str = None
    output: str = None
    output_format: str = "text"
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    dim: int = 3
    family: str = "path"
    schedule: tuple[float, ...] = geometric_schedule(0.5, 0.5, 20)
    seed: int = 0
    trials: int = 100
    lattice_order: int = DEFAULT_LATTICE_ORDER
    divisions: int = 1
    max_workers: int = 1
    solver: str = "PULP_CBC_CMD"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"Invalid command '{self.command}'. Must be one of: {list(COMMANDS)}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"Invalid format '{self.output_format}'. Must be one of: {list(FORMATS)}")
        if not 2 <= self.dim <= MAX_DIM:
            raise ConfigError(f"unsupported dimension {self.dim}: must lie in 2..{MAX_DIM}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.lattice_order < 2:
            raise ConfigError(f"lattice order must be >= 2, got {self.lattice_order}")
        if self.divisions < 1:
            raise ConfigError(f"divisions must be >= 1, got {self.divisions}")
        if self.command == "analyze" and not self.input:
            raise ConfigError("analyze needs --input")
        if self.family == "kuhn" and self.command != "generate":
            raise ConfigError("the kuhn family is only available to 'generate'")

    def family_spec(self) -> FamilySpec:
        return FamilySpec(self.family, self.dim, self.schedule, self.seed)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """
        Builds the config from parsed arguments.

        Raises:
            ConfigError: On a malformed schedule or out-of-range settings
            ThresholdError: On thresholds outside their admissible ranges
        """
        return cls(
            command=args.command,
            input=args.input,
            output=args.output,
            output_format=args.format,
            thresholds=Thresholds(gamma0=args.gamma0, min_sine=args.min_sine, theta0=args.theta0),
            dim=args.dim,
            family=args.family,
            schedule=parse_schedule(args.schedule),
            seed=args.seed,
            trials=args.trials,
            lattice_order=args.lattice_order,
            divisions=args.divisions,
            max_workers=args.max_workers,
            solver=args.solver,
        )


def _write(config: RunConfig, text: str):
    if config.output:
        with open(config.output, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"Report written to: {config.output}")
    else:
        sys.stdout.write(text)


def _dumps(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def _element_line(record) -> str:
    head = f"element {record.element} {list(record.vertex_indices)}"
    if record.error is not None:
        return f"{head}: ERROR {record.error}"
    r = record.report
    failed = [name for name, v in r.verdicts.items() if not v.satisfied]
    status = "OK" if not failed else "VIOLATED " + ",".join(failed)
    return (f"{head}: min_vertex_sine={r.min_vertex_sine:.6g} best_edge_sine={r.best_edge_sine:.6g} "
            f"max_dihedral={r.max_dihedral:.6g} jamet_theta={r.jamet_theta:.6g} {status}")


def _fmt_summary(value) -> str:
    return "n/a" if value is None else f"{value:.17g}"


def cmd_analyze(config: RunConfig) -> int:
    try:
        with open(config.input, encoding="utf-8") as f:
            mesh = parse_mesh(f.read())
    except OSError as e:
        print(f"Error: cannot read mesh file: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except MaxAngleError as e:
        print(f"Error: {config.input}: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if mesh.dim > MAX_DIM:
        print(f"Error: unsupported dimension {mesh.dim}: must lie in 2..{MAX_DIM}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    conformity = face_to_face_check(mesh, config.solver)
    analysis = analyze_mesh(mesh, config.thresholds, config.max_workers)
    summary = analysis.summary

    if config.output_format == "json":
        text = _dumps({
            "face_to_face": {
                "conforming": conformity.conforming,
                "violations": [list(p) for p in conformity.violations],
                "overfull_facets": [list(f) for f in conformity.overfull_facets],
            },
            "elements": [r.as_dict() for r in analysis.elements],
            "summary": summary,
        })
    elif config.output_format == "csv":
        rows = ["element,vertices,min_vertex_sine,best_edge_sine,max_dihedral,jamet_theta,satisfied,error"]
        for r in analysis.elements:
            vertices = " ".join(str(i) for i in r.vertex_indices)
            if r.error is not None:
                rows.append(f'{r.element},{vertices},,,,,false,"{r.error}"')
                continue
            q = r.report
            values = ",".join(format(x, ".17g") for x in
                              (q.min_vertex_sine, q.best_edge_sine, q.max_dihedral, q.jamet_theta))
            rows.append(f"{r.element},{vertices},{values},{str(q.satisfied).lower()},")
        text = "\n".join(rows) + "\n"
    else:
        lines = [_element_line(r) for r in analysis.elements]
        lines.append(f"face-to-face: {'yes' if conformity.conforming else 'NO'}"
                     + "".join(f" ({e}, {f})" for e, f in conformity.violations))
        lines += [
            f"elements: {summary['elements']} (errors: {summary['errors']})",
            f"violating elements: {summary['violating_elements']}",
            f"min best_edge_sine: {_fmt_summary(summary['min_best_edge_sine'])}",
            f"max dihedral: {_fmt_summary(summary['max_dihedral'])}",
            f"max jamet_theta: {_fmt_summary(summary['max_jamet_theta'])}",
            f"min vertex sine: {_fmt_summary(summary['min_vertex_sine'])}",
        ]
        text = "\n".join(lines) + "\n"
    _write(config, text)

    ok = analysis.satisfied and conformity.conforming
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_generate(config: RunConfig) -> int:
    if config.family == "kuhn":
        mesh = kuhn_mesh(config.dim, config.divisions)
    else:
        mesh = family_mesh(generate_family(config.family_spec()))
    _write(config, serialize_mesh(mesh))
    return EXIT_OK


def cmd_study(config: RunConfig) -> int:
    report = run_family_study(config.family_spec(), config.lattice_order, config.max_workers)
    if config.output_format == "json":
        _write(config, _dumps(report.to_json()))
    else:
        _write(config, report.to_csv())
    # verdict lines must not mix into a CSV written to stdout
    stream = sys.stdout if config.output else sys.stderr
    for verdict in equivalence_verdicts(report).values():
        found = "co-degeneration detected" if verdict.co_degeneration else "co-degeneration not detected"
        agreement = "consistent" if verdict.consistent else "INCONSISTENT"
        print(f"{verdict.name}: {found}, {agreement} ({verdict.detail})", file=stream)
    return EXIT_OK


def cmd_check_identities(config: RunConfig) -> int:
    results = run_identity_suite(config.dim, config.trials, config.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name}: max violation {r.max_violation:.3g} (tolerance {r.tolerance:g}, {r.checked} checks) {status}")
    if config.output:
        _write(config, _dumps(identity_results_as_dict(results)))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def cmd_interp_study(config: RunConfig) -> int:
    rows = run_interpolation_study(config.family_spec(), config.lattice_order)
    if config.output_format == "json":
        _write(config, _dumps([{f.name: getattr(r, f.name) for f in fields(r)} for r in rows]))
    else:
        _write(config, interpolation_rows_to_csv(rows))
    if any(math.isinf(r.ratio) for r in rows):
        logger.warning("degenerate members in the schedule have infinite ratios")
    return EXIT_OK


COMMAND_HANDLERS = {
    "analyze": cmd_analyze,
    "generate": cmd_generate,
    "study": cmd_study,
    "check-identities": cmd_check_identities,
    "interp-study": cmd_interp_study,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxangle",
        description="Angle conditions of simplices: mesh analysis, degenerating families and identity checks",
    )

    # Positional command
    parser.add_argument("command", choices=COMMANDS, help="What to run")

    # Files and output
    parser.add_argument("--input", type=str, default=None, help="Mesh file to analyze")
    parser.add_argument("--output", type=str, default=None, help="Output file (default: stdout)")
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default="text",
        help="Report format; 'text' is CSV for study and interp-study (default: text)",
    )

    # Condition thresholds
    parser.add_argument(
        "--gamma0",
        type=float,
        default=DEFAULT_THRESHOLDS.gamma0,
        help=f"Bound on dihedral angles, in (0, pi) (default: {DEFAULT_THRESHOLDS.gamma0})",
    )
    parser.add_argument(
        "--min-sine",
        type=float,
        default=DEFAULT_THRESHOLDS.min_sine,
        help=f"Lower bound C on d-sines (default: {DEFAULT_THRESHOLDS.min_sine})",
    )
    parser.add_argument(
        "--theta0",
        type=float,
        default=DEFAULT_THRESHOLDS.theta0,
        help=f"Bound on Jamet's angle, in (0, pi/2) (default: {DEFAULT_THRESHOLDS.theta0})",
    )

    # Families
    parser.add_argument(
        "--family",
        choices=list(FAMILY_NAMES) + ["kuhn"],
        default="path",
        help="Simplex family; 'kuhn' (generate only) is the Kuhn subdivision of the unit cube (default: path)",
    )
    parser.add_argument("--dim", type=int, default=3, help=f"Dimension d, 2..{MAX_DIM} (default: 3)")
    parser.add_argument(
        "--schedule",
        type=str,
        default=DEFAULT_SCHEDULE,
        help=f"eps schedule as start,factor,count (default: {DEFAULT_SCHEDULE})",
    )
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("--divisions", type=int, default=1, help="Kuhn cube divisions per axis (default: 1)")

    # Numerical settings
    parser.add_argument("--trials", type=int, default=100, help="Trials of the identity suite (default: 100)")
    parser.add_argument(
        "--lattice-order",
        type=int,
        default=DEFAULT_LATTICE_ORDER,
        help=f"Barycentric lattice order for interpolation sups (default: {DEFAULT_LATTICE_ORDER})",
    )
    parser.add_argument(
        "--max-workers",
        type=int,
        default=1,
        help="Maximum number of parallel workers; 1 runs sequentially (default: 1)",
    )
    parser.add_argument(
        "--solver",
        type=str,
        default="PULP_CBC_CMD",
        help="LP solver for the face-to-face check (default: PULP_CBC_CMD)",
    )

    # Verbose flag
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging on stderr")
    return parser


def main(argv=None) -> int:
    """Main function to handle command-line arguments and execute the command."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = RunConfig.from_args(args)
        if config.command == "analyze" and config.solver not in get_available_solvers():
            raise ConfigError(f"Solver '{config.solver}' not available. Available solvers: {get_available_solvers()}")
        if config.command in ("study", "interp-study") or (config.command == "generate" and config.family != "kuhn"):
            config.family_spec()
    except (MaxAngleError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        return COMMAND_HANDLERS[config.command](config)
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
