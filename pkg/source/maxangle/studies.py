"""
Family studies: the angle quantities and interpolation ratios along an eps
schedule, the trends relating them, and the randomized identity suite for sin_d.
"""

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List

import numpy as np

from maxangle.conditions import best_edge_sine, best_jamet_theta, max_subsimplex_dihedral, min_vertex_sine
from maxangle.errors import DegenerateSimplexError
from maxangle.families import FamilySpec, generate_family, random_simplex
from maxangle.geometry import Simplex, diameter
from maxangle.interpolation import (
    DEFAULT_LATTICE_ORDER,
    default_suite,
    interpolation_error,
    interpolation_ratio,
)
from maxangle.sine import UnitVectorTuple, sin_d_at_vertex, sin_d_of_vectors, sin_d_via_product

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("eps", "min_vertex_sine", "best_edge_sine", "max_dihedral", "jamet_theta", "interp_ratio")
INTERP_COLUMNS = ("eps", "diameter", "sup_value_err", "sup_gradient_err", "ratio")
# families whose shapes are constructions of this package rather than named in the literature
CONSTRUCTED_FAMILIES = ("needle", "cap", "sliver", "splinter")

# trend thresholds used by equivalence_verdicts
DIHEDRAL_TOL = 0.01
SINE_TOL = 0.05
THETA_TOL = 0.05
# rows with SINE_BAND <= best_edge_sine < SINE_TOL are between the two regimes;
# theta and the edge sine approach their limits at family-dependent rates there
SINE_BAND = 0.01
INTERP_GROWTH = 10.0

# identity suite tolerances
IDENTITY_TOLERANCES = {
    "product_formula": 1e-9,
    "two_dimensional_reduction": 1e-12,
    "range": 1e-12,
    "dependence_to_zero": 0.0,
    "normalization_invariance": 1e-10,
    "corner_anchor": 1e-10,
}
# random draws with a worse edge-matrix condition number are redrawn
MAX_CONDITION = 1e4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class FamilyRow:
    eps: float
    min_vertex_sine: float
    best_edge_sine: float
    max_dihedral: float
    jamet_theta: float
    interp_ratio: float


@dataclass
class FamilyReport:
    """One row per schedule entry, in schedule order."""

    spec: FamilySpec
    rows: List[FamilyRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self) -> str:
        out = [",".join(CSV_COLUMNS)]
        out += [",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) for r in self.rows]
        return "\n".join(out) + "\n"

    @staticmethod
    def rows_from_csv(text: str) -> List[FamilyRow]:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"expected CSV header {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
        return [FamilyRow(**{c: float(row[c]) for c in CSV_COLUMNS}) for row in reader]

    def to_json(self) -> dict:
        return {
            "family": self.spec.name,
            "dim": self.spec.dim,
            "seed": self.spec.seed,
            "constructed": self.spec.name in CONSTRUCTED_FAMILIES,
            "rows": [asdict(r) for r in self.rows],
            "verdicts": {name: asdict(v) for name, v in equivalence_verdicts(self).items()},
        }


def _family_row(eps: float, simplex: Simplex, lattice_order: int) -> FamilyRow:
    try:
        dihedral = max_subsimplex_dihedral(simplex)[0]
    except DegenerateSimplexError as e:
        logger.debug("eps=%g: %s", eps, e)
        dihedral = math.pi
    try:
        ratio = interpolation_ratio(simplex, default_suite(simplex.dim), lattice_order)
    except DegenerateSimplexError as e:
        logger.debug("eps=%g: %s", eps, e)
        ratio = math.inf
    return FamilyRow(
        eps=eps,
        min_vertex_sine=min_vertex_sine(simplex),
        best_edge_sine=best_edge_sine(simplex)[0],
        max_dihedral=dihedral,
        jamet_theta=best_jamet_theta(simplex)[0],
        interp_ratio=ratio,
    )


def run_family_study(spec: FamilySpec, lattice_order: int = DEFAULT_LATTICE_ORDER,
                     max_workers: int = 1) -> FamilyReport:
    """
    Evaluates every angle quantity and the interpolation ratio for each eps.

    A degenerate member gets max_dihedral = pi and interp_ratio = inf.

    Args:
        spec (FamilySpec): Family, dimension, schedule and seed
        lattice_order (int): Barycentric lattice order for the interpolation sups
        max_workers (int): Worker threads; 1 runs sequentially

    Returns:
        FamilyReport: Rows in schedule order
    """
    members = generate_family(spec)
    jobs = list(zip(spec.schedule, members))
    if max_workers <= 1:
        rows = [_family_row(eps, s, lattice_order) for eps, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            rows = list(executor.map(lambda job: _family_row(job[0], job[1], lattice_order), jobs))
    return FamilyReport(spec=spec, rows=rows)


@dataclass(frozen=True)
class TrendVerdict:
    """
    Attributes:
        name (str): Pair of quantities compared
        co_degeneration (bool): Whether the degenerating side of the trend occurs in the data
        consistent (bool): Whether the data agree with the equivalence
        detail (str): Human readable explanation
    """

    name: str
    co_degeneration: bool
    consistent: bool
    detail: str


def equivalence_verdicts(report: FamilyReport) -> dict[str, TrendVerdict]:
    """
    Checks the rows against the equivalences of the conditions.

        dihedral_vs_edge_sine  rows with a dihedral angle above pi - 0.01 have
                               best_edge_sine below 0.05
        jamet_vs_edge_sine     at the end of the schedule theta is within 0.05
                               of pi/2 exactly when best_edge_sine is below 0.05;
                               rows with best_edge_sine below 0.01 all have it
        interpolation_growth   the ratio grows more than 10x over the schedule
                               exactly when the dihedral angles approach pi
    """
    if not report.rows:
        raise ValueError("the report has no rows")
    dihedral = report.column("max_dihedral")
    sine = report.column("best_edge_sine")
    theta = report.column("jamet_theta")
    ratio = report.column("interp_ratio")

    flat = dihedral > math.pi - DIHEDRAL_TOL
    dihedral_verdict = TrendVerdict(
        name="dihedral_vs_edge_sine",
        co_degeneration=bool(flat.any()),
        consistent=bool(np.all(sine[flat] < SINE_TOL)),
        detail=f"{int(flat.sum())} rows with a dihedral angle above pi - {DIHEDRAL_TOL}, "
               f"best_edge_sine there <= {float(sine[flat].max()) if flat.any() else float('nan'):.3g}",
    )

    sine_small = bool(sine[-1] < SINE_TOL)
    theta_flat = bool(theta[-1] > math.pi / 2 - THETA_TOL)
    below_band = sine < SINE_BAND
    lagging = int(np.sum(below_band & (theta <= math.pi / 2 - THETA_TOL)))
    jamet_verdict = TrendVerdict(
        name="jamet_vs_edge_sine",
        co_degeneration=sine_small and theta_flat,
        consistent=sine_small == theta_flat and lagging == 0,
        detail=f"last row: best_edge_sine {sine[-1]:.3g}, pi/2 - theta {math.pi / 2 - theta[-1]:.3g}; "
               f"{lagging} of {int(below_band.sum())} rows below {SINE_BAND} keep theta under pi/2 - {THETA_TOL}",
    )

    growth = ratio[-1] / ratio[0] if ratio[0] > 0.0 else math.inf
    grows = bool(growth > INTERP_GROWTH)
    interp_verdict = TrendVerdict(
        name="interpolation_growth",
        co_degeneration=grows and dihedral_verdict.co_degeneration,
        consistent=grows == dihedral_verdict.co_degeneration,
        detail=f"interp_ratio grows by {growth:.3g}x over the schedule",
    )
    return {v.name: v for v in (dihedral_verdict, jamet_verdict, interp_verdict)}


@dataclass(frozen=True)
class InterpolationRow:
    eps: float
    diameter: float
    sup_value_err: float
    sup_gradient_err: float
    ratio: float


def run_interpolation_study(spec: FamilySpec, lattice_order: int = DEFAULT_LATTICE_ORDER) -> List[InterpolationRow]:
    """Interpolation errors of the default quadratic suite along the family, maxima over the suite."""
    rows = []
    for eps, simplex in zip(spec.schedule, generate_family(spec)):
        suite = default_suite(spec.dim)
        try:
            errors = [interpolation_error(simplex, v, lattice_order) for v in suite]
            ratio = interpolation_ratio(simplex, suite, lattice_order)
            value_err = max(e.sup_value_err for e in errors)
            gradient_err = max(e.sup_gradient_err for e in errors)
        except DegenerateSimplexError as e:
            logger.debug("eps=%g: %s", eps, e)
            value_err = gradient_err = ratio = math.inf
        rows.append(InterpolationRow(eps, diameter(simplex), value_err, gradient_err, ratio))
    return rows


def interpolation_rows_to_csv(rows: List[InterpolationRow]) -> str:
    out = [",".join(INTERP_COLUMNS)]
    out += [",".join(_fmt(getattr(r, c)) for c in INTERP_COLUMNS) for r in rows]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_violation: float
    tolerance: float
    checked: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def well_conditioned_simplex(d: int, rng: np.random.Generator) -> Simplex:
    """Random d-simplex whose edge matrix has condition number at most MAX_CONDITION."""
    while True:
        s = random_simplex(d, rng)
        if np.linalg.cond(s.edge_matrix()) <= MAX_CONDITION:
            return s


def _classical_sine(triangle: Simplex, i: int) -> float:
    v = triangle.vertices
    a = v[(i + 1) % 3] - v[i]
    b = v[(i + 2) % 3] - v[i]
    return math.sin(math.atan2(abs(a[0] * b[1] - a[1] * b[0]), float(a @ b)))


def run_identity_suite(dim: int, trials: int, seed: int) -> List[IdentityResult]:
    """
    Randomized checks of the sin_d identities on seeded random input.

        product_formula            sin_d at A_i against its product form, every (i, pivot)
        two_dimensional_reduction  sin_2 against the classical sine on random triangles
        range                      every value computed lies in [0, 1]
        dependence_to_zero         linearly dependent unit vectors give 0
        normalization_invariance   rescaling the vectors by nonzero constants changes nothing
        corner_anchor              sin_d at the orthogonal corner of conv{0, e_1..e_d} is 1

    Returns:
        List[IdentityResult]: One result per identity, in the order above
    """
    if dim < 2:
        raise ValueError(f"identities need d >= 2, got {dim}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(IDENTITY_TOLERANCES, 0.0)
    counts = dict.fromkeys(IDENTITY_TOLERANCES, 0)

    def record(name: str, violation: float):
        worst[name] = max(worst[name], violation)
        counts[name] += 1

    def in_range(value: float):
        record("range", max(0.0, value - 1.0, -value))

    for _ in range(trials):
        s = well_conditioned_simplex(dim, rng)
        direct = [sin_d_at_vertex(s, i).value for i in range(dim + 1)]
        for i in range(dim + 1):
            in_range(direct[i])
            for pivot in range(dim + 1):
                if pivot == i:
                    continue
                product = sin_d_via_product(s, i, pivot).value
                in_range(product)
                record("product_formula", abs(direct[i] - product) / max(direct[i], 1e-300))

        triangle = random_simplex(2, rng)
        for i in range(3):
            value = sin_d_at_vertex(triangle, i).value
            in_range(value)
            record("two_dimensional_reduction", abs(value - _classical_sine(triangle, i)))

        t = rng.standard_normal((dim, dim))
        t[-1] = rng.standard_normal(dim - 1) @ t[:-1]
        dependent = sin_d_of_vectors(UnitVectorTuple.from_vectors(t)).value
        record("dependence_to_zero", abs(dependent))

        t = rng.standard_normal((dim, dim))
        base = sin_d_of_vectors(UnitVectorTuple.from_vectors(t)).value
        scale = rng.uniform(0.1, 10.0, size=(dim, 1)) * rng.choice([-1.0, 1.0], size=(dim, 1))
        scaled = sin_d_of_vectors(UnitVectorTuple.from_vectors(scale * t)).value
        in_range(base)
        record("normalization_invariance", abs(base - scaled))

    corner = Simplex(np.vstack([np.zeros(dim), np.eye(dim)]))
    record("corner_anchor", abs(sin_d_at_vertex(corner, 0).value - 1.0))

    results = [IdentityResult(name, worst[name], IDENTITY_TOLERANCES[name], counts[name]) for name in IDENTITY_TOLERANCES]
    for r in results:
        logger.debug("%s: max violation %.3g over %d checks", r.name, r.max_violation, r.checked)
    return results


def identity_results_as_dict(results: List[IdentityResult]) -> dict:
    return {r.name: {f.name: getattr(r, f.name) for f in fields(r)} | {"passed": r.passed} for r in results}
