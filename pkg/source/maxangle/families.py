"""
Parameterized simplex families S(eps) used for degeneration studies.

    path      orthoscheme whose orthogonal edge chain has lengths 1, eps, eps^2, ...
    needle    regular simplex with A_d pulled along its edge towards A_0 to distance eps
    cap       apex at height eps over the centroid of a regular (d-1)-simplex base
    sliver    d = 3 only: two opposite edges crossing at right angles, separated by eps
    splinter  regular simplex scaled by (1, eps, ..., eps)
    regular   regular d-simplex, eps ignored
    random    vertices uniform in the unit cube, drawn from a seeded generator

The needle, cap, sliver and splinter parameterizations are constructions of
this package; only path simplices and flat/skinny shapes are named in the
literature the conditions come from.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from maxangle.errors import FamilyError
from maxangle.geometry import Simplex, is_degenerate, regular_simplex

logger = logging.getLogger(__name__)

FAMILY_NAMES = ("path", "needle", "cap", "sliver", "splinter", "regular", "random")
# families whose conditions stay satisfied as eps -> 0
NON_DEGENERATING = ("path", "needle", "regular")
MIN_DIM = 2


@dataclass(frozen=True)
class FamilySpec:
    """
    A named family and its eps schedule.

    Attributes:
        name (str): One of FAMILY_NAMES
        dim (int): Simplex dimension d >= 2
        schedule (tuple[float, ...]): Strictly decreasing positive eps values
        seed (int): Seed of the 'random' family
    """

    name: str
    dim: int
    schedule: tuple[float, ...]
    seed: int = 0

    def __post_init__(self):
        if self.name not in FAMILY_NAMES:
            raise FamilyError(f"Unknown family '{self.name}'. Must be one of: {list(FAMILY_NAMES)}")
        if self.dim < MIN_DIM:
            raise FamilyError(f"families need d >= {MIN_DIM}, got d = {self.dim}")
        if self.name == "sliver" and self.dim != 3:
            raise FamilyError(f"the sliver family is defined for d = 3 only, got d = {self.dim}")
        schedule = tuple(float(e) for e in self.schedule)
        if not schedule:
            raise FamilyError("the eps schedule is empty")
        if any(not math.isfinite(e) or e <= 0.0 for e in schedule):
            raise FamilyError(f"eps values must be positive and finite, got {schedule}")
        if any(b >= a for a, b in zip(schedule, schedule[1:])):
            raise FamilyError("the eps schedule must be strictly decreasing")
        object.__setattr__(self, "schedule", schedule)


def geometric_schedule(start: float, factor: float, count: int) -> tuple[float, ...]:
    """start, start*factor, ..., start*factor^(count-1)."""
    if count < 1:
        raise FamilyError(f"schedule count must be >= 1, got {count}")
    if not 0.0 < factor < 1.0:
        raise FamilyError(f"schedule factor must lie in (0, 1), got {factor}")
    if start <= 0.0:
        raise FamilyError(f"schedule start must be positive, got {start}")
    return tuple(start * factor**k for k in range(count))


def path_simplex(d: int, eps: float) -> Simplex:
    v = np.zeros((d + 1, d))
    for k in range(1, d + 1):
        v[k] = v[k - 1]
        v[k, k - 1] = eps ** (k - 1)
    return Simplex(v)


def needle_simplex(d: int, eps: float) -> Simplex:
    v = regular_simplex(d).vertices.copy()
    v[d] = v[0] + eps * (v[d] - v[0])
    return Simplex(v)


def cap_simplex(d: int, eps: float) -> Simplex:
    base = np.hstack([regular_simplex(d - 1).vertices, np.zeros((d, 1))])
    apex = base.mean(axis=0)
    apex[-1] = eps
    return Simplex(np.vstack([base, apex]))


def sliver_simplex(eps: float) -> Simplex:
    h = eps / 2
    return Simplex([
        [-0.5, 0.0, h],
        [0.5, 0.0, h],
        [0.0, -0.5, -h],
        [0.0, 0.5, -h],
    ])


def splinter_simplex(d: int, eps: float) -> Simplex:
    scale = np.full(d, eps)
    scale[0] = 1.0
    return Simplex(regular_simplex(d).vertices * scale)


def random_simplex(d: int, rng: np.random.Generator) -> Simplex:
    while True:
        try:
            s = Simplex(rng.uniform(0.0, 1.0, size=(d + 1, d)))
        except ValueError:
            continue
        if not is_degenerate(s):
            return s
        logger.debug("redrawing degenerate random %d-simplex", d)


def family_member(name: str, d: int, eps: float, rng: np.random.Generator = None) -> Simplex:
    """The member S(eps) of family `name` in dimension d."""
    if name == "path":
        return path_simplex(d, eps)
    if name == "needle":
        return needle_simplex(d, eps)
    if name == "cap":
        return cap_simplex(d, eps)
    if name == "sliver":
        if d != 3:
            raise FamilyError(f"the sliver family is defined for d = 3 only, got d = {d}")
        return sliver_simplex(eps)
    if name == "splinter":
        return splinter_simplex(d, eps)
    if name == "regular":
        return regular_simplex(d)
    if name == "random":
        return random_simplex(d, rng if rng is not None else np.random.default_rng(0))
    raise FamilyError(f"Unknown family '{name}'. Must be one of: {list(FAMILY_NAMES)}")


def generate_family(spec: FamilySpec) -> list[Simplex]:
    """Members of the family in schedule order; deterministic given the spec."""
    rng = np.random.default_rng(spec.seed)
    return [family_member(spec.name, spec.dim, eps, rng) for eps in spec.schedule]
