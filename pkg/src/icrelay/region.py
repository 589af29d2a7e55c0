"""DoF regions, outer bounds and antenna-split optimization.

Regions are 2-D polytopes over the nonnegative quadrant, stored as
half-plane inequalities ``a1*d1 + a2*d2 <= b`` together with their vertex
list.  All region arithmetic is exact rational: sum bounds can be
half-integers (realized operationally over two channel uses) and vertex
enumeration must not depend on float tolerance.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import atan2

import numpy as np

from .channel import AntennaConfig
from .errors import DimensionMismatchError, UnboundedRegionError
from .linalg import DEFAULT_TOL, TolerancePolicy, as_matrix, numerical_rank

Ineq = tuple  # (a1, a2, b) with integer coefficients and rational bound


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def frac_str(x) -> str:
    f = frac(x)
    return f"{f.numerator}/{f.denominator}"


def parse_frac(text) -> Fraction:
    return Fraction(str(text))


@dataclass(frozen=True)
class DofRegion:
    """Half-plane description plus counterclockwise vertex list."""

    inequalities: tuple
    vertices: tuple

    def __post_init__(self):
        for (x, y) in self.vertices:
            if not point_satisfies(self.inequalities, (x, y)):
                raise ValueError(f"vertex ({x}, {y}) violates an inequality")
        if not point_satisfies(self.inequalities, (Fraction(0), Fraction(0))):
            raise ValueError("region does not contain the origin")

    def max_sum(self) -> Fraction:
        """Largest d1 + d2 over the region."""
        return max((x + y for (x, y) in self.vertices), default=Fraction(0))

    def sum_bound(self):
        """The bound of the d1 + d2 inequality, if one is present."""
        for (a1, a2, b) in self.inequalities:
            if (a1, a2) == (1, 1):
                return b
        return None


@dataclass(frozen=True)
class OuterBounds:
    """Information-theoretic sum-DoF bounds and whether they are met."""

    cognitive: int
    genie: int
    tight: bool


def point_satisfies(inequalities, point) -> bool:
    x, y = frac(point[0]), frac(point[1])
    if x < 0 or y < 0:
        return False
    return all(a1 * x + a2 * y <= frac(b) for (a1, a2, b) in inequalities)


def region_contains(region: DofRegion, point) -> bool:
    """Exact rational membership test (nonnegativity included)."""
    return point_satisfies(region.inequalities, point)


def region_vertices(inequalities) -> list:
    """Vertices of the polytope cut out by ``inequalities`` and d1, d2 >= 0.

    Enumerates pairwise line intersections, keeps the feasible ones, and
    orders them counterclockwise starting from the origin.  Raises
    :class:`UnboundedRegionError` when some coordinate is unbounded, which
    happens exactly when no inequality has a positive coefficient on it.
    """
    ineqs = [(int(a1), int(a2), frac(b)) for (a1, a2, b) in inequalities]
    if any(a1 < 0 or a2 < 0 for (a1, a2, _) in ineqs):
        raise ValueError("inequality coefficients must be nonnegative")
    if not any(a1 > 0 for (a1, a2, _) in ineqs) or not any(a2 > 0 for (_, a2, __) in ineqs):
        raise UnboundedRegionError("region is unbounded; add per-user bounds")
    if any(b < 0 for (_, __, b) in ineqs):
        raise ValueError("region excludes the origin (negative bound)")

    lines = [(Fraction(a1), Fraction(a2), b) for (a1, a2, b) in ineqs]
    lines.append((Fraction(1), Fraction(0), Fraction(0)))   # d1 = 0
    lines.append((Fraction(0), Fraction(1), Fraction(0)))   # d2 = 0

    points = set()
    for i in range(len(lines)):
        a1, a2, b1 = lines[i]
        for j in range(i + 1, len(lines)):
            c1, c2, b2 = lines[j]
            det = a1 * c2 - a2 * c1
            if det == 0:
                continue
            x = (b1 * c2 - b2 * a2) / det
            y = (a1 * b2 - c1 * b1) / det
            if x >= 0 and y >= 0 and all(p * x + q * y <= b for (p, q, b) in ineqs):
                points.add((x, y))

    verts = sorted(points)
    if len(verts) <= 2:
        return verts
    cx = sum(x for x, _ in verts) / len(verts)
    cy = sum(y for _, y in verts) / len(verts)
    verts.sort(key=lambda p: atan2(float(p[1] - cy), float(p[0] - cx)))
    if (Fraction(0), Fraction(0)) in points:
        k = verts.index((Fraction(0), Fraction(0)))
        verts = verts[k:] + verts[:k]
    return verts


def make_region(inequalities) -> DofRegion:
    ineqs = tuple((int(a1), int(a2), frac(b)) for (a1, a2, b) in inequalities)
    return DofRegion(inequalities=ineqs, vertices=tuple(region_vertices(ineqs)))


def linear_sum_dof(m, n, l) -> Fraction:
    """Sum DoF achievable with a linear relay strategy: m + min(m, n, l, max(n,l)/2)."""
    m, n, l = frac(m), frac(n), frac(l)
    return m + min(m, n, l, max(n, l) / 2)


def linear_dof_region(config: AntennaConfig) -> DofRegion:
    """Largest DoF region under linear relaying: per-user caps plus the sum bound."""
    m = Fraction(config.m)
    bound = linear_sum_dof(config.m, config.n, config.l)
    return make_region([(1, 0, m), (0, 1, m), (1, 1, bound)])


def outer_bounds(config: AntennaConfig) -> OuterBounds:
    """Sum-DoF upper bounds from transmitter-relay cooperation and from
    handing the relay's observation to both receivers.

    ``tight`` flags the regime where the linear scheme meets the smaller of
    the two: max(n, l) >= 2 * min(m, n, l).
    """
    m, n, l = config.m, config.n, config.l
    cognitive = min(m + l, 2 * m)
    genie = min(m + n, 2 * m)
    tight = max(n, l) >= 2 * min(m, n, l)
    return OuterBounds(cognitive=cognitive, genie=genie, tight=tight)


def ic_dof_region(h11, h12, h21, h22, tol: TolerancePolicy = DEFAULT_TOL) -> DofRegion:
    """DoF region of a two-user MIMO interference channel with arbitrary
    (possibly rank-deficient) channel matrices.

    All seven bounds are rank expressions over the individual matrices and
    their stacked, side-by-side and 2x2-block compositions; ranks are
    numerical with the shared tolerance.
    """
    h11, h12 = as_matrix(h11), as_matrix(h12)
    h21, h22 = as_matrix(h21), as_matrix(h22)
    n1, m1 = h11.shape
    if h12.shape[0] != n1:
        raise DimensionMismatchError("h11 and h12 must have equal row counts")
    m2 = h12.shape[1]
    if h21.shape[1] != m1:
        raise DimensionMismatchError("h21 column count must match h11")
    n2 = h21.shape[0]
    if h22.shape != (n2, m2):
        raise DimensionMismatchError(
            f"h22 has shape {h22.shape}, expected ({n2}, {m2})")

    def rk(a):
        return numerical_rank(a, tol)

    z11 = np.zeros((n1, m1), dtype=np.complex128)
    z12 = np.zeros((n1, m2), dtype=np.complex128)
    z21 = np.zeros((n2, m1), dtype=np.complex128)
    z22 = np.zeros((n2, m2), dtype=np.complex128)

    r12, r21 = rk(h12), rk(h21)
    rows_1 = rk(np.hstack([h11, h12]))
    rows_2 = rk(np.hstack([h22, h21]))
    cols_1 = rk(np.vstack([h11, h21]))
    cols_2 = rk(np.vstack([h22, h12]))
    cross_a = rk(np.block([[h11, h12], [h21, z22]]))
    cross_b = rk(np.block([[z11, h12], [h21, h22]]))
    cross_c = rk(np.block([[z22, h21], [h12, h11]]))

    ineqs = [
        (1, 0, Fraction(rk(h11))),
        (0, 1, Fraction(rk(h22))),
        (1, 1, Fraction(rows_1 + cols_2 - r12)),
        (1, 1, Fraction(rows_2 + cols_1 - r21)),
        (1, 1, Fraction(cross_a + cross_b - r12 - r21)),
        (2, 1, Fraction(rows_1 + cols_1 + cross_b - r12 - r21)),
        (1, 2, Fraction(rows_2 + cols_2 + cross_c - r12 - r21)),
    ]
    return make_region(ineqs)


def allocate_antennas(m: int, relay_total: int):
    """Best split of ``relay_total`` half-duplex relay antennas into (n, l).

    Exhaustively enumerates integer splits n + l = relay_total and maximizes
    the linear sum DoF.  Returns ``(splits, value)`` with every argmax split
    listed; the optimum is typically at ratio 1/2 or 2, never the even split.
    """
    if relay_total < 0:
        raise ValueError(f"relay_total must be >= 0, got {relay_total}")
    best = None
    splits = []
    for n in range(relay_total + 1):
        l = relay_total - n
        value = linear_sum_dof(m, n, l)
        if best is None or value > best:
            best = value
            splits = [(n, l)]
        elif value == best:
            splits.append((n, l))
    return splits, best


def region_to_jsonable(region: DofRegion) -> dict:
    return {
        "inequalities": [[a1, a2, frac_str(b)] for (a1, a2, b) in region.inequalities],
        "vertices": [[frac_str(x), frac_str(y)] for (x, y) in region.vertices],
    }


def region_from_jsonable(doc: dict) -> DofRegion:
    ineqs = [(int(a1), int(a2), parse_frac(b)) for (a1, a2, b) in doc["inequalities"]]
    verts = tuple((parse_frac(x), parse_frac(y)) for (x, y) in doc["vertices"])
    return DofRegion(inequalities=tuple(ineqs), vertices=verts)
