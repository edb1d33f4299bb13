"""High-SNR pre-log regions for the two-user fading MAC, in exact rationals.

A pre-log region is the set of per-user rate slopes (Pi_1, Pi_2) against
log SNR that a scheme sustains as SNR grows.  Every boundary here is a ratio
of small integers, so all arithmetic uses :class:`fractions.Fraction`: the
published corner values are reproduced exactly, never to within a float
tolerance.

Regions come in two kinds:

``CapSum``
    {Pi_1 <= a1, Pi_2 <= a2, Pi_1 + Pi_2 <= c, Pi >= 0} - the joint
    transmission scheme and the perfect-knowledge (genie) reference.

``BetaHull``
    the hull of time-sharing points (beta * a1, (1-beta) * a2) - TDMA.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

CAP_SUM = "cap_sum"
BETA_HULL = "beta_hull"

JOINT_BEATS_ALL_TDMA = "JointBeatsAllTDMA"
BEST_TDMA_BEATS_JOINT = "BestTDMABeatsJoint"
INTERMEDIATE_ZONE = "IntermediateZone"


def as_fraction(x) -> Fraction:
    """Exact rational from int/str/Fraction; floats go through their shortest
    decimal repr so that e.g. 0.05 means 1/20, not its binary neighbour."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class PreLogRegion:
    """A 2-D rate-pre-log polytope with exact rational data."""

    kind: str
    cap1: Fraction = Fraction(0)
    cap2: Fraction = Fraction(0)
    cap_sum: Fraction = Fraction(0)
    beta_points: tuple = ()
    empty: bool = False

    @classmethod
    def cap_sum_region(cls, a1: Fraction, a2: Fraction, c: Fraction,
                       empty: bool = False) -> "PreLogRegion":
        a1, a2, c = map(as_fraction, (a1, a2, c))
        if min(a1, a2, c) < 0:
            raise ValueError("caps must be non-negative")
        c = min(c, a1 + a2)
        return cls(kind=CAP_SUM, cap1=a1, cap2=a2, cap_sum=c, empty=empty)

    @classmethod
    def beta_hull(cls, points: Iterable[tuple]) -> "PreLogRegion":
        pts = tuple((as_fraction(b), as_fraction(x), as_fraction(y))
                    for b, x, y in points)
        return cls(kind=BETA_HULL, beta_points=pts)

    def best_sum(self) -> Fraction:
        if self.kind == CAP_SUM:
            return self.cap_sum if not self.empty else Fraction(0)
        return max((x + y for _, x, y in self.beta_points),
                   default=Fraction(0))

    def contains(self, x, y) -> bool:
        x, y = as_fraction(x), as_fraction(y)
        if x < 0 or y < 0:
            return False
        if self.kind == CAP_SUM:
            if self.empty:
                return x == 0 and y == 0
            return x <= self.cap1 and y <= self.cap2 and x + y <= self.cap_sum
        # BetaHull of a line segment plus the axes: triangle test
        corners = region_corners(self)
        return _in_convex_hull(corners, (x, y))


def _in_convex_hull(corners: Sequence[tuple], p: tuple) -> bool:
    # corners counterclockwise; point inside iff never strictly right of an edge
    n = len(corners)
    if n == 1:
        return p == corners[0]
    for i in range(n):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % n]
        cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0)
        if cross < 0:
            return False
    return True


def joint_region(n_t1: int, n_t2: int, n_r: int, l_star: int) -> PreLogRegion:
    """Pre-log region of the joint-transmission scheme.

    Caps min(n_r, n_t1) * (1 - (n_t1+n_t2)/L*), same with n_t2, and the sum
    cap min(n_r, n_t1+n_t2) * (1 - (n_t1+n_t2)/L*).  Empty (flagged) when
    L* < n_t1 + n_t2: the pilot overhead exceeds the pilot period.
    """
    nt = n_t1 + n_t2
    factor = 1 - Fraction(nt, l_star)
    if factor < 0:
        return PreLogRegion.cap_sum_region(
            Fraction(0), Fraction(0), Fraction(0), empty=True)
    return PreLogRegion.cap_sum_region(
        min(n_r, n_t1) * factor,
        min(n_r, n_t2) * factor,
        min(n_r, nt) * factor)


def tdma_single_user_cap(n_ts: int, n_r: int, l_star: int) -> Fraction:
    """Point-to-point pre-log of one user running the pilot scheme alone."""
    return min(n_r, n_ts) * max(Fraction(0), 1 - Fraction(n_ts, l_star))


def tdma_region(n_t1: int, n_t2: int, n_r: int, l_star: int,
                beta_grid: Sequence = (0, Fraction(1, 2), 1)) -> PreLogRegion:
    """Pre-log region of the pilot-based TDMA scheme.

    Time sharing beta traces the segment between the two single-user points
    (a1, 0) and (0, a2) with a_s = min(n_r, n_ts)(1 - n_ts/L*); the region is
    the triangle under it.
    """
    a1 = tdma_single_user_cap(n_t1, n_r, l_star)
    a2 = tdma_single_user_cap(n_t2, n_r, l_star)
    pts = []
    for beta in beta_grid:
        b = as_fraction(beta)
        if not 0 <= b <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        pts.append((b, b * a1, (1 - b) * a2))
    return PreLogRegion.beta_hull(pts)


def coherent_tdma_sum(n_t1: int, n_t2: int, n_r: int, beta) -> Fraction:
    """Sum pre-log of TDMA with a genie-coherent receiver at share beta."""
    b = as_fraction(beta)
    if not 0 <= b <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    return b * min(n_r, n_t1) + (1 - b) * min(n_r, n_t2)


def genie_region(n_t1: int, n_t2: int, n_r: int) -> PreLogRegion:
    """Capacity pre-log region with perfect receiver-side fading knowledge
    and no pilots: caps min(n_r, n_t1), min(n_r, n_t2), min(n_r, sum).
    Scaling it by (1 - (n_t1+n_t2)/L*) reproduces :func:`joint_region`.
    """
    return PreLogRegion.cap_sum_region(
        Fraction(min(n_r, n_t1)), Fraction(min(n_r, n_t2)),
        Fraction(min(n_r, n_t1 + n_t2)))


def scale_region(region: PreLogRegion, factor) -> PreLogRegion:
    f = as_fraction(factor)
    if region.kind != CAP_SUM:
        raise ValueError("only CapSum regions can be scaled")
    if f < 0:
        return PreLogRegion.cap_sum_region(
            Fraction(0), Fraction(0), Fraction(0), empty=True)
    return PreLogRegion.cap_sum_region(
        region.cap1 * f, region.cap2 * f, region.cap_sum * f,
        empty=region.empty)


@dataclass(frozen=True)
class SuperiorityThresholds:
    """Sufficient pilot-period thresholds for scheme superiority.

    ``joint_superior_if_lstar_gt``: joint transmission beats every TDMA
    scheme (even genie-coherent) for L* strictly above it.
    ``tdma_superior_if_lstar_lt``: the pilot-based TDMA scheme beats joint
    transmission for L* strictly below it.  ``None`` encodes +infinity
    (the convention a/0 = infinity).
    """

    joint_superior_if_lstar_gt: Fraction | None
    tdma_superior_if_lstar_lt: Fraction | None


def superiority_thresholds(n_t1: int, n_t2: int, n_r: int) -> SuperiorityThresholds:
    nt = n_t1 + n_t2
    m_sum = min(n_r, nt)
    m_max = min(n_r, max(n_t1, n_t2))
    m_min = min(n_r, n_t1, n_t2)

    denom_joint = m_sum - m_max
    joint_thr = Fraction(m_sum * nt, denom_joint) if denom_joint > 0 else None

    denom_tdma = m_sum - m_min
    if denom_tdma > 0:
        weakest = min(n_t1 * n_r, n_t1 * n_t1, n_t2 * n_r, n_t2 * n_t2)
        tdma_thr = Fraction(m_sum * nt - weakest, denom_tdma)
    else:
        tdma_thr = None
    return SuperiorityThresholds(joint_thr, tdma_thr)


@dataclass(frozen=True)
class SchemeComparison:
    classification: str
    joint_sum: Fraction
    tdma_sum: Fraction
    coherent_tdma_sum: Fraction
    joint_empty: bool
    thresholds: SuperiorityThresholds


def compare_schemes(n_t1: int, n_t2: int, n_r: int,
                    l_star: int) -> SchemeComparison:
    """Classify joint transmission against the best TDMA schemes at L*.

    Strict inequalities throughout; equalities land in the intermediate
    zone, except that an empty joint region (L* < n_t1 + n_t2) is always
    classified TDMA-superior, degenerate zero-rate ties included.
    """
    joint = joint_region(n_t1, n_t2, n_r, l_star)
    joint_sum = joint.best_sum()
    tdma_best = max(tdma_single_user_cap(n_t1, n_r, l_star),
                    tdma_single_user_cap(n_t2, n_r, l_star))
    coherent_best = max(coherent_tdma_sum(n_t1, n_t2, n_r, 1),
                        coherent_tdma_sum(n_t1, n_t2, n_r, 0))
    thresholds = superiority_thresholds(n_t1, n_t2, n_r)
    if joint.empty or joint_sum < tdma_best:
        cls = BEST_TDMA_BEATS_JOINT
    elif joint_sum > coherent_best:
        cls = JOINT_BEATS_ALL_TDMA
    else:
        cls = INTERMEDIATE_ZONE
    return SchemeComparison(cls, joint_sum, tdma_best, coherent_best,
                            joint.empty, thresholds)


def p2p_prelog_bound(n_t: int, n_r: int, l_star: int) -> Fraction:
    """Point-to-point pilot-scheme pre-log: min(n_t,n_r)(1 - min(n_t,n_r)/L*)."""
    m = min(n_t, n_r)
    return m * max(Fraction(0), 1 - Fraction(m, l_star))


def p2p_measure_bound(n_t: int, n_r: int, lambda_d) -> Fraction:
    """Reference point-to-point capacity pre-log lower bound,
    min(n_t,n_r)(1 - min(n_t,n_r) * mu{f_H > 0}), with mu = 2 lambda_d for a
    band-filling PSD.  Matches :func:`p2p_prelog_bound` when 1/(2 lambda_d)
    is an integer.
    """
    ld = as_fraction(lambda_d)
    m = min(n_t, n_r)
    return m * max(Fraction(0), 1 - m * 2 * ld)


def siso_capacity_check(lambda_d) -> dict:
    """Single-antenna sanity point: TDMA meets the capacity pre-log.

    For n_r = n_t1 = n_t2 = 1 the capacity pre-log is 1 - 2 lambda_d (the
    measure of the spectral gap of a brickwall PSD) and the TDMA per-user
    cap is 1 - 1/L*; the two agree exactly whenever 1/(2 lambda_d) is an
    integer.
    """
    ld = as_fraction(lambda_d)
    if not 0 < ld < Fraction(1, 2):
        raise ValueError("lambda_d must lie in (0, 1/2)")
    capacity = 1 - 2 * ld
    inv = 1 / (2 * ld)
    l_star = inv.numerator // inv.denominator  # floor, boundary inclusive
    tdma = tdma_single_user_cap(1, 1, l_star)
    return {
        "tdma_sum": tdma,
        "capacity_prelog": capacity,
        "exact_match": tdma == capacity,
        "l_star": l_star,
    }


def region_corners(region: PreLogRegion) -> list[tuple]:
    """Counterclockwise vertices of the polytope, exact rationals.

    CapSum regions enumerate the active faces: a rectangle when the sum cap
    is slack, a pentagon when it cuts one corner, a triangle when it binds
    everywhere.  BetaHull regions reduce to the triangle under the
    time-sharing segment.
    """
    zero = Fraction(0)
    if region.kind == BETA_HULL:
        a1 = max((x for _, x, _ in region.beta_points), default=zero)
        a2 = max((y for _, _, y in region.beta_points), default=zero)
        raw = [(zero, zero), (a1, zero), (zero, a2)]
    else:
        if region.empty:
            return [(zero, zero)]
        a1, a2, c = region.cap1, region.cap2, region.cap_sum
        raw = [(zero, zero), (min(a1, c), zero)]
        if a1 < c < a1 + a2:
            raw.append((a1, c - a1))
        if a2 < c < a1 + a2:
            raw.append((c - a2, a2))
        if c >= a1 + a2:
            raw.append((a1, a2))
        raw.append((zero, min(a2, c)))
    corners = []
    for pt in raw:
        if pt not in corners:
            corners.append(pt)
    if len(corners) > 1 and corners[0] == (zero, zero) and all(
            x == 0 and y == 0 for x, y in corners):
        return [(zero, zero)]
    return corners
