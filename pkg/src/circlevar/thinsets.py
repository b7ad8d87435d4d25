"""Nowhere dense closed sets at finite depth: Cantor schemes, exact
neighborhood measures, thin-set construction against a decay profile,
nested families, covering numbers and the uniqueness-criterion quotient.

Coordinates are rationals in units of pi (ambient circle = [0, 2]); a
scheme stores its retained closed intervals stage by stage, so every
measurement is exact rational arithmetic.  Radian-valued neighborhood
radii produce exact ``PiLinear`` measures.

The thinness profile lambda is given in the decreasing normalization
lambda(delta) -> 0; the certified neighborhood bound is
B(delta) = delta / lambda(delta).  (A bound below 2*delta is impossible
for a nonempty set, which is exactly the refusal criterion.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .core import CircleFunction, PiecewiseConstant, integral_modulus_table
from .errors import (
    ConstructionFailureError,
    InvalidArgumentError,
    InvalidBranchingError,
    InvalidSchemeError,
    InvalidStructureError,
)
from .exact import PiLinear

Interval = tuple[Fraction, Fraction]

FULL_CIRCLE = (Fraction(0), Fraction(2))


class CantorScheme:
    """Finite-depth description of a nowhere dense closed set.

    ``stages[j]`` lists the retained closed intervals at depth j (depth 0
    is the ambient hull); stage j+1 intervals nest inside stage j and are
    pairwise disjoint.  Degenerate intervals (a == a) model point sets.
    """

    def __init__(self, stages: Sequence[Sequence[Interval]], ambient: Interval = FULL_CIRCLE):
        self.ambient = (Fraction(ambient[0]), Fraction(ambient[1]))
        if self.ambient[1] <= self.ambient[0]:
            raise InvalidSchemeError("empty ambient interval")
        self.stages = [
            [(Fraction(a), Fraction(b)) for a, b in stage] for stage in stages
        ]
        if not self.stages or not self.stages[-1]:
            raise InvalidSchemeError("scheme has no retained intervals")
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.stages) - 1

    def deepest(self) -> list[Interval]:
        return self.stages[-1]

    def validate(self) -> None:
        lo, hi = self.ambient
        for j, stage in enumerate(self.stages):
            prev_b = None
            for a, b in stage:
                if b < a:
                    raise InvalidSchemeError(f"inverted interval at stage {j}")
                if a < lo or b > hi:
                    raise InvalidSchemeError(f"interval outside ambient at stage {j}")
                if prev_b is not None and a <= prev_b:
                    raise InvalidSchemeError(f"overlapping/unsorted intervals at stage {j}")
                prev_b = b
            if j > 0:
                if len(stage) < len(self.stages[j - 1]):
                    raise InvalidSchemeError("retained-interval count must not decrease")
                parents = self.stages[j - 1]
                pi_ = 0
                for a, b in stage:
                    while pi_ < len(parents) and parents[pi_][1] < a:
                        pi_ += 1
                    if pi_ >= len(parents) or not (parents[pi_][0] <= a and b <= parents[pi_][1]):
                        raise InvalidSchemeError(f"stage {j} interval not nested in stage {j-1}")

    def endpoint_anchored(self) -> bool:
        d = self.deepest()
        return d[0][0] == self.ambient[0] and d[-1][1] == self.ambient[1]

    def gaps(self) -> list[Interval]:
        """Open intervals complementary to the deepest stage, inside the ambient."""
        d = self.deepest()
        out: list[Interval] = []
        if d[0][0] > self.ambient[0]:
            out.append((self.ambient[0], d[0][0]))
        for (a1, b1), (a2, b2) in zip(d, d[1:]):
            out.append((b1, a2))
        if d[-1][1] < self.ambient[1]:
            out.append((d[-1][1], self.ambient[1]))
        return out

    def endpoints(self) -> list[Fraction]:
        pts: list[Fraction] = []
        for a, b in self.deepest():
            pts.append(a)
            if b != a:
                pts.append(b)
        return pts

    def stage_measure(self) -> Fraction:
        return sum((b - a for a, b in self.deepest()), Fraction(0))

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "ambient": [
                [self.ambient[0].numerator, self.ambient[0].denominator],
                [self.ambient[1].numerator, self.ambient[1].denominator],
            ],
            "stages": [
                [[a.numerator, a.denominator, b.numerator, b.denominator] for a, b in stage]
                for stage in self.stages
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CantorScheme":
        amb = obj.get("ambient")
        ambient = FULL_CIRCLE if amb is None else (Fraction(amb[0][0], amb[0][1]), Fraction(amb[1][0], amb[1][1]))
        stages = [
            [(Fraction(an, ad), Fraction(bn, bd)) for an, ad, bn, bd in stage]
            for stage in obj["stages"]
        ]
        return cls(stages, ambient)

    @classmethod
    def middle_alpha(cls, depth: int, keep: Fraction = Fraction(1, 3), ambient: Interval = FULL_CIRCLE) -> "CantorScheme":
        """Classic construction keeping the two end portions of relative
        length ``keep`` at every stage (keep = 1/3 is middle thirds)."""
        keep = Fraction(keep)
        if not (0 < keep < Fraction(1, 2)):
            raise InvalidArgumentError("keep ratio must lie in (0, 1/2)")
        stages = [[(Fraction(ambient[0]), Fraction(ambient[1]))]]
        for _ in range(depth):
            nxt = []
            for a, b in stages[-1]:
                w = (b - a) * keep
                nxt.append((a, a + w))
                nxt.append((b - w, b))
            stages.append(nxt)
        return cls(stages, ambient)

    @classmethod
    def points(cls, pts: Sequence[Fraction], ambient: Interval = FULL_CIRCLE) -> "CantorScheme":
        ivs = sorted((Fraction(p), Fraction(p)) for p in pts)
        return cls([ivs], ambient)


def _merge_inflated(intervals, delta, circle_len):
    """Merge [a - delta, b + delta] components on the circle; exact."""
    los = [a - delta for a, _ in intervals]
    his = [b + delta for _, b in intervals]
    comps = []
    cur_lo, cur_hi = los[0], his[0]
    for lo, hi in zip(los[1:], his[1:]):
        if lo <= cur_hi:
            if hi > cur_hi:
                cur_hi = hi
        else:
            comps.append((cur_lo, cur_hi))
            cur_lo, cur_hi = lo, hi
    comps.append((cur_lo, cur_hi))
    # wrap-around merge between the last and first component
    if len(comps) > 1 and comps[-1][1] >= comps[0][0] + circle_len:
        first = comps.pop(0)
        last = comps.pop()
        comps.insert(0, (last[0] - circle_len, first[1]))
    total = comps[0][1] - comps[0][0]
    for lo, hi in comps[1:]:
        total = total + (hi - lo)
    if total > circle_len:
        return circle_len
    return total


def neighborhood_measure(scheme: CantorScheme, delta, units: str = "pi"):
    """Exact Lebesgue measure of the delta-neighborhood of the deepest
    stage, as a subset of the circle (components merge across the
    basepoint).  ``units='pi'`` takes and returns values in units of pi
    (a Fraction); ``units='rad'`` takes a rational radian delta and
    returns a ``PiLinear``."""
    if units not in ("pi", "rad"):
        raise InvalidArgumentError("units must be 'pi' or 'rad'")
    intervals = scheme.deepest()
    if units == "pi":
        d = Fraction(delta)
        if d <= 0:
            raise InvalidArgumentError("delta must be positive")
        return _merge_inflated(intervals, d, Fraction(2))
    d = Fraction(delta)
    if d <= 0:
        raise InvalidArgumentError("delta must be positive")
    ivs = [(PiLinear.pi_units(a), PiLinear.pi_units(b)) for a, b in intervals]
    return _merge_inflated(ivs, PiLinear(d, 0), PiLinear(0, 2))


# ---------------------------------------------------------------------------
# thinness profiles
# ---------------------------------------------------------------------------


class ThinProfile:
    """Decreasing profile lambda(delta) -> 0 with certified neighborhood
    bound B(delta) = delta / lambda(delta) (radians).

    The stock ``inverse_log`` profile is lambda(delta) = 1/log2(2 pi/delta),
    giving B(delta) = delta * log2(2 pi / delta).
    """

    def __init__(self, lambda_fn: Callable[[float], float], name: str):
        self.lambda_fn = lambda_fn
        self.name = name

    @classmethod
    def inverse_log(cls) -> "ThinProfile":
        return cls(lambda d: 1.0 / math.log2(2.0 * math.pi / d), "inverse_log")

    @classmethod
    def linear(cls) -> "ThinProfile":
        """lambda(delta) = delta; infeasible, used to exercise refusal."""
        return cls(lambda d: d, "linear")

    @classmethod
    def constant(cls, c: float) -> "ThinProfile":
        return cls(lambda d, c=c: c, f"constant_{c}")

    def lam(self, delta_rad: float) -> float:
        return self.lambda_fn(float(delta_rad))

    def bound_rad(self, delta_rad: float) -> float:
        return float(delta_rad) / self.lambda_fn(float(delta_rad))

    def bound_rad_mp(self, delta_rad: Fraction):
        """High-precision bound for exact-measure comparisons."""
        with mpmath.workdps(60):
            d = mpmath.mpf(delta_rad.numerator) / delta_rad.denominator
            if self.name == "inverse_log":
                return d * mpmath.log(2 * mpmath.pi / d, 2)
            return d / mpmath.mpf(self.lambda_fn(float(d)))


DYADIC_GRID_K = tuple(range(0, 21))  # delta = 2^-k radians, k = 0..20


def dyadic_deltas(k_range: Sequence[int] = DYADIC_GRID_K) -> list[Fraction]:
    return [Fraction(1, 2**k) for k in k_range]


@dataclass(frozen=True)
class ProfileCheck:
    delta_rad: float
    measure_rad: float
    bound_rad: float
    passed: bool


def verify_profile(scheme: CantorScheme, profile: ThinProfile, deltas: Optional[Sequence[Fraction]] = None) -> list[ProfileCheck]:
    """Exact measure against the profile bound on a dyadic radian grid."""
    if deltas is None:
        deltas = dyadic_deltas()
    out = []
    for d in deltas:
        meas = neighborhood_measure(scheme, d, units="rad")
        with mpmath.workdps(60):
            m_val = mpmath.mpf(meas.a.numerator) / meas.a.denominator + mpmath.pi * meas.b.numerator / meas.b.denominator
            b_val = profile.bound_rad_mp(Fraction(d))
            ok = bool(m_val <= b_val)
        out.append(ProfileCheck(float(d), float(meas), profile.bound_rad(float(d)), ok))
    return out


def build_thin_cantor(
    profile: ThinProfile,
    depth: int,
    ambient: Interval = FULL_CIRCLE,
    deltas: Optional[Sequence[Fraction]] = None,
) -> tuple[CantorScheme, list[ProfileCheck]]:
    """Endpoint-anchored symmetric scheme whose deepest stage satisfies
    |(E)_delta| <= B(delta) on the dyadic grid; stage lengths are chosen
    greedily (smallest dyadic shrink that passes the exact checks).

    Returns the scheme together with the mandatory verification report.
    Raises construction-failure naming the violated delta when the
    profile is infeasible (bound below the hard floor 2*delta).
    """
    if deltas is None:
        deltas = dyadic_deltas()
    deltas = sorted((Fraction(d) for d in deltas), reverse=True)
    for d in deltas:
        if profile.bound_rad(float(d)) < 2.0 * float(d):
            raise ConstructionFailureError(
                f"profile {profile.name} infeasible: bound below the 2*delta floor at delta = {float(d)}",
                delta=float(d),
            )
    lo, hi = Fraction(ambient[0]), Fraction(ambient[1])
    span = hi - lo

    def build_stages(ms: list[int]) -> list[list[Interval]]:
        stages = [[(lo, hi)]]
        for m in ms:
            w = span / 2**m
            nxt = []
            for a, b in stages[-1]:
                nxt.append((a, a + w))
                nxt.append((b - w, b))
            stages.append(nxt)
        return stages

    def passes(ms: list[int]) -> bool:
        scheme = CantorScheme(build_stages(ms), (lo, hi))
        return all(c.passed for c in verify_profile(scheme, profile, deltas))

    ms: list[int] = []
    prev_m = 1
    for j in range(depth):
        m = prev_m + 2
        # exponential then binary search for the smallest passing shrink
        while not passes(ms + [m]):
            if m > 1 << 22:
                raise ConstructionFailureError(
                    f"profile {profile.name} not satisfiable at depth {j + 1}",
                    delta=float(deltas[-1]),
                )
            m = max(m + 1, int(m * 1.5))
        lo_m, hi_m = prev_m + 2, m
        while lo_m < hi_m:
            mid = (lo_m + hi_m) // 2
            if passes(ms + [mid]):
                hi_m = mid
            else:
                lo_m = mid + 1
        ms.append(lo_m)
        prev_m = lo_m
    scheme = CantorScheme(build_stages(ms), (lo, hi))
    report = verify_profile(scheme, profile, deltas)
    if not all(c.passed for c in report):
        bad = next(c for c in report if not c.passed)
        raise ConstructionFailureError(
            f"profile {profile.name} not satisfiable at depth {depth}", delta=bad.delta_rad
        )
    return scheme, report


def homothety_image(
    scheme: CantorScheme,
    interval: Interval,
    profile: Optional[ThinProfile] = None,
    deltas: Optional[Sequence[Fraction]] = None,
) -> CantorScheme:
    """Affine image of the scheme onto ``interval`` (exact rationals).
    When a profile is given, the inherited neighborhood bound is
    re-verified on the dyadic grid (contraction can only improve it)."""
    a, b = Fraction(interval[0]), Fraction(interval[1])
    if b <= a:
        raise InvalidArgumentError("degenerate target interval")
    lo, hi = scheme.ambient
    ratio = (b - a) / (hi - lo)

    def mapped(x: Fraction) -> Fraction:
        return a + (x - lo) * ratio

    stages = [[(mapped(x), mapped(y)) for x, y in stage] for stage in scheme.stages]
    out = CantorScheme(stages, (a, b))
    if profile is not None:
        report = verify_profile(out, profile, deltas)
        if not all(c.passed for c in report):
            bad = next(c for c in report if not c.passed)
            raise ConstructionFailureError(
                "homothetic image violates the inherited profile bound", delta=bad.delta_rad
            )
    return out


# ---------------------------------------------------------------------------
# nested families
# ---------------------------------------------------------------------------


@dataclass
class FamilyMember:
    round_index: int  # k, 1-based
    slot: int  # l, 1-based within the round
    scheme: CantorScheme
    planted_gap: Interval


@dataclass
class NestedFamily:
    base: CantorScheme
    members: list[FamilyMember]
    counts: list[int]  # N_k actually used
    sup_gap_history: list[Fraction]  # sup complementary length after each round
    gaps_before_round: list[list[Interval]]  # index k-1 -> gaps planted into at round k

    def round_members(self, k: int) -> list[FamilyMember]:
        return [m for m in self.members if m.round_index == k]

    def union_deepest(self) -> list[Interval]:
        ivs = sorted(iv for m in self.members for iv in m.scheme.deepest())
        return ivs

    def terminal_gaps(self) -> list[Interval]:
        """Complementary intervals of the union of all planted stages."""
        return _complement(self.union_deepest(), self.base.ambient)


def _complement(sorted_intervals: list[Interval], ambient: Interval) -> list[Interval]:
    lo, hi = ambient
    out: list[Interval] = []
    cur = lo
    for a, b in sorted_intervals:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < hi:
        out.append((cur, hi))
    return out


def nested_family(
    base: CantorScheme,
    counts: Optional[Sequence[int]] = None,
    rounds: int = 2,
) -> NestedFamily:
    """Recursive planting of homothetic copies of ``base`` into the
    longest complementary intervals (ties leftmost-first).

    ``counts`` gives N_k per round (N_1 must be 1).  When omitted, round
    k+1 plants into every gap longer than half the previous round's sup
    (the copies' own top gap shrinks only geometrically, so a per-round
    halving of the overall sup is not generally achievable)."""
    if base.ambient != FULL_CIRCLE:
        base = homothety_image(base, FULL_CIRCLE)
    if counts is not None:
        counts = list(counts)
        if counts[0] != 1:
            raise InvalidArgumentError("N_1 must be 1")
        if len(counts) < rounds:
            raise InvalidArgumentError("counts shorter than the number of rounds")
    members: list[FamilyMember] = []
    used_counts: list[int] = []
    sup_hist: list[Fraction] = []
    gaps_hist: list[list[Interval]] = []

    gaps_hist.append([FULL_CIRCLE])
    members.append(FamilyMember(1, 1, base, FULL_CIRCLE))
    used_counts.append(1)

    for k in range(2, rounds + 1):
        union = sorted(iv for m in members for iv in m.scheme.deepest())
        gaps = _complement(union, FULL_CIRCLE)
        if not gaps:
            raise InvalidBranchingError(f"no complementary intervals left at round {k}")
        sup_len = max(b - a for a, b in gaps)
        sup_hist.append(sup_len)
        order = sorted(range(len(gaps)), key=lambda i: (-(gaps[i][1] - gaps[i][0]), gaps[i][0]))
        if counts is not None:
            n_k = counts[k - 1]
        else:
            n_k = sum(1 for a, b in gaps if (b - a) * 2 > sup_len)
            n_k = max(n_k, 1)
        if n_k > len(gaps):
            raise InvalidBranchingError(
                f"round {k} wants {n_k} copies but only {len(gaps)} gaps exist"
            )
        chosen = sorted(order[:n_k], key=lambda i: gaps[i][0])
        gaps_hist.append([gaps[i] for i in chosen])
        for l, gi in enumerate(chosen, start=1):
            copy = homothety_image(base, gaps[gi])
            members.append(FamilyMember(k, l, copy, gaps[gi]))
        used_counts.append(n_k)

    union = sorted(iv for m in members for iv in m.scheme.deepest())
    final_gaps = _complement(union, FULL_CIRCLE)
    sup_hist.append(max((b - a for a, b in final_gaps), default=Fraction(0)))
    return NestedFamily(base, members, used_counts, sup_hist, gaps_hist)


# ---------------------------------------------------------------------------
# covering numbers and the uniqueness criterion
# ---------------------------------------------------------------------------


def covering_number(scheme: CantorScheme, eps: Fraction) -> int:
    """Smallest number of closed length-eps intervals covering the deepest
    stage (greedy left-to-right sweep, optimal on the line)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    count = 0
    covered_to: Optional[Fraction] = None
    for a, b in scheme.deepest():
        while True:
            if a == b:
                need = covered_to is None or a > covered_to
            else:
                need = covered_to is None or covered_to < b
            if not need:
                break
            start = a if (covered_to is None or covered_to < a) else covered_to
            count += 1
            covered_to = start + eps
            if count > 10**7:
                raise InvalidArgumentError("eps too small relative to the scheme")
    return count


def covering_number_exhaustive(scheme: CantorScheme, eps: Fraction, limit: int = 200000) -> int:
    """Independent brute-force oracle for small schemes: explores all
    covers whose intervals start at set endpoints or chain off an earlier
    interval, memoized on the coverage frontier."""
    eps = Fraction(eps)
    intervals = scheme.deepest()

    def first_uncovered(frontier: Optional[Fraction]) -> Optional[Fraction]:
        for a, b in intervals:
            if frontier is None or a > frontier:
                return a
            if (a < b and frontier < b) :
                return frontier
        return None

    from functools import lru_cache

    calls = [0]

    @lru_cache(maxsize=None)
    def best_from(frontier: Optional[Fraction]) -> int:
        calls[0] += 1
        if calls[0] > limit:
            raise InvalidArgumentError("exhaustive covering search too large")
        p = first_uncovered(frontier)
        if p is None:
            return 0
        # any cover must contain an interval [s, s+eps] with s in [p-eps, p];
        # candidate starts: p itself, or a set endpoint in the window, and
        # each candidate must strictly advance the frontier
        candidates = {p}
        for a, b in intervals:
            for q in (a, b):
                if p - eps <= q <= p:
                    candidates.add(q)
        usable = [s for s in candidates if frontier is None or s + eps > frontier]
        return 1 + min(best_from(s + eps) for s in sorted(usable, reverse=True))

    return best_from(None)


@dataclass(frozen=True)
class UniquenessProfile:
    eps: list[float]
    covering: list[int]
    quotient: list[float]  # N_eps / log(1/eps)


def uniqueness_profile(scheme: CantorScheme, eps_grid: Sequence[Fraction]) -> UniquenessProfile:
    """Covering-criterion quotient N_eps / log(1/eps) along a grid.

    A finite computation exhibits only the trend of the liminf; a
    decreasing quotient is evidence, never a certificate."""
    eps_list, ns, qs = [], [], []
    for e in sorted((Fraction(x) for x in eps_grid), reverse=True):
        n = covering_number(scheme, e)
        e_rad = float(e) * math.pi
        eps_list.append(e_rad)
        ns.append(n)
        qs.append(n / math.log(1.0 / e_rad))
    return UniquenessProfile(eps_list, ns, qs)


# ---------------------------------------------------------------------------
# the piecewise-constant shift bound
# ---------------------------------------------------------------------------


def scheme_point_to_circle(q: Fraction) -> Fraction:
    """Map a scheme coordinate in [0, 2] to the lift coordinate [-1, 1)."""
    return ((Fraction(q) + 1) % 2) - 1


def gap_step_function(scheme: CantorScheme, gap_values: Sequence, retained_value=Fraction(0), grid_size: int = 4096) -> CircleFunction:
    """Piecewise-constant function taking ``gap_values[i]`` on the i-th
    complementary interval of the scheme and ``retained_value`` on the
    retained intervals (the finite-depth stand-in for the set itself)."""
    gaps = scheme.gaps()
    if len(gap_values) != len(gaps):
        raise InvalidArgumentError(f"need {len(gaps)} gap values, got {len(gap_values)}")
    # gap-start marks outrank retained-value marks at coinciding points
    marks: list[tuple[Fraction, int, Fraction]] = []
    for (a, b), v in zip(gaps, gap_values):
        marks.append((scheme_point_to_circle(a), 1, Fraction(v)))
        marks.append((scheme_point_to_circle(b), 0, Fraction(retained_value)))
    marks.sort()
    ded_b, ded_v = [], []
    for q, _prio, v in marks:
        if ded_b and q == ded_b[-1]:
            ded_v[-1] = v
        else:
            ded_b.append(q)
            ded_v.append(v)
    if len(ded_b) < 2:
        ded_b.append(ded_b[0] + 1)
        ded_v.append(ded_v[0])
    return CircleFunction.from_descriptor(PiecewiseConstant(ded_b, ded_v), grid_size)


@dataclass(frozen=True)
class ShiftBoundReport:
    deltas: list[float]
    omega1: list[float]
    bound: list[float]
    ratios: list[float]
    passed: bool


def lemma2_bound_check(
    x: CircleFunction,
    scheme: CantorScheme,
    deltas: Sequence[float],
    sup_norm: Optional[float] = None,
) -> ShiftBoundReport:
    """Check omega_1(delta, x) <= 2 ||x||_inf |(E)_delta| on a delta grid
    for x constant on every complementary interval of the scheme."""
    if not isinstance(x.descriptor, PiecewiseConstant):
        raise InvalidStructureError("x must carry a piecewise-constant descriptor")
    allowed = {scheme_point_to_circle(q) for q in scheme.endpoints()}
    allowed |= {scheme_point_to_circle(q) for g in scheme.gaps() for q in g}
    for q in x.descriptor.breaks:
        if q not in allowed:
            raise InvalidStructureError(f"breakpoint {q} is not an endpoint of the scheme")
    sup = x.descriptor.sup_norm() if sup_norm is None else sup_norm
    deltas = sorted(float(d) for d in deltas)
    om = integral_modulus_table(x, deltas)
    bounds, ratios = [], []
    ok = True
    for d, o in zip(deltas, om):
        meas = float(neighborhood_measure(scheme, Fraction(d), units="rad"))
        b = 2.0 * sup * meas
        bounds.append(b)
        ratios.append(o / b if b > 0 else 0.0)
        if o > b * (1 + 1e-9) + 1e-12:
            ok = False
    return ShiftBoundReport(list(deltas), [float(v) for v in om], bounds, ratios, ok)
