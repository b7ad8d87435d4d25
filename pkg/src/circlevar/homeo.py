"""Circle homeomorphisms as exact piecewise-linear lifts, staircase
(devil's) functions over Cantor schemes, series-built smoothing maps and
the bounded-variation-to-Lipschitz reparametrization.

A homeomorphism is stored as strictly increasing rational breakpoint
pairs (t, h(t)) in units of pi over one period of the lift, with domain
anchored at [-1, 1] and h(1) = h(-1) + 2.  Maps built from staircases
are normalized (h(-1) = -1); rotations and their composites may carry a
shifted range.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (
    CircleFunction,
    Descriptor,
    LacunaryCosine,
    PiecewiseConstant,
    PiecewiseLinear,
    SineOfPiecewiseLinear,
    TrigPolynomial,
    _exp_integral,
)
from .errors import (
    InvalidArgumentError,
    InvalidHomeomorphismError,
    InvalidSchemeError,
    InvalidWeightsError,
    UnboundedVariationError,
)
from .exact import float_to_fraction
from .thinsets import CantorScheme

TWO_PI = 2.0 * math.pi

COMPOSE_BREAKPOINT_CAP = 10**6


class CircleHomeomorphism:
    """Strictly increasing piecewise-linear lift of a circle homeomorphism."""

    def __init__(self, pairs: Sequence[tuple[Fraction, Fraction]]):
        pairs = [(Fraction(t), Fraction(h)) for t, h in pairs]
        if len(pairs) < 2:
            raise InvalidHomeomorphismError("need at least two breakpoints")
        ts = [t for t, _ in pairs]
        hs = [h for _, h in pairs]
        if ts[0] != -1 or ts[-1] != 1:
            raise InvalidHomeomorphismError("lift domain must be exactly [-1, 1] in units of pi")
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise InvalidHomeomorphismError("breakpoints must be strictly increasing in t")
        if any(h2 <= h1 for h1, h2 in zip(hs, hs[1:])):
            raise InvalidHomeomorphismError("breakpoints must be strictly increasing in h")
        if hs[-1] - hs[0] != 2:
            raise InvalidHomeomorphismError("lift must rise by exactly one period")
        self.ts = ts
        self.hs = hs
        self._tf = np.array([float(t) for t in ts]) * math.pi
        self._hf = np.array([float(h) for h in hs]) * math.pi

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls) -> "CircleHomeomorphism":
        return cls([(Fraction(-1), Fraction(-1)), (Fraction(1), Fraction(1))])

    @classmethod
    def rotation(cls, c: Fraction) -> "CircleHomeomorphism":
        c = Fraction(c)
        return cls([(Fraction(-1), Fraction(-1) + c), (Fraction(1), Fraction(1) + c)])

    @classmethod
    def from_anchored_pairs(cls, pairs: Sequence[tuple[Fraction, Fraction]]) -> "CircleHomeomorphism":
        """Re-anchor an arbitrary one-period lift to the domain [-1, 1]."""
        pairs = sorted((Fraction(t), Fraction(h)) for t, h in pairs)
        ts = [t for t, _ in pairs]
        if ts[-1] - ts[0] != 2:
            raise InvalidHomeomorphismError("lift must cover exactly one period")
        # shift the domain by an even integer so that -1 falls inside
        k = (Fraction(-1) - ts[0]) // 2
        spairs = [(t + 2 * k, h + 2 * k) for t, h in pairs]
        out: list[tuple[Fraction, Fraction]] = []
        v_start = _interp_pairs(spairs, Fraction(-1))
        out.append((Fraction(-1), v_start))
        for t, h in spairs[:-1]:  # the last pair repeats the first, one period up
            if -1 < t < 1:
                out.append((t, h))
            elif -1 < t + 2 < 1:
                out.append((t + 2, h + 2))
        out.sort()
        out.append((Fraction(1), v_start + 2))
        return cls(out)

    # -- evaluation --------------------------------------------------------

    def evaluate_exact(self, q: Fraction) -> Fraction:
        """Lift value at q*pi, exact rationals, periodic extension."""
        q = Fraction(q)
        k = (q + 1) // 2
        q0 = q - 2 * k
        return _interp_sorted(self.ts, self.hs, q0) + 2 * k

    def evaluate(self, t):
        """Float lift values (radians in, radians out)."""
        t = np.asarray(t, dtype=float)
        u = np.mod(t + math.pi, TWO_PI) - math.pi
        wind = np.round((t - u) / TWO_PI)
        return np.interp(u, self._tf, self._hf) + wind * TWO_PI

    def __call__(self, t):
        return self.evaluate(t)

    # -- algebra -----------------------------------------------------------

    def invert(self) -> "CircleHomeomorphism":
        return CircleHomeomorphism.from_anchored_pairs([(h, t) for t, h in zip(self.ts, self.hs)])

    def compose(self, other: "CircleHomeomorphism") -> "CircleHomeomorphism":
        """self after other: t -> self(other(t)); exact on rationals."""
        ts: set[Fraction] = set(other.ts)
        inv = other.invert()
        lo, hi = other.hs[0], other.hs[-1]
        for b in self.ts:
            k0 = (lo - b) / 2
            k = math.ceil(k0) if k0 == int(k0) else (lo - b) // 2 + 1
            bb = b + 2 * Fraction(k)
            while bb < hi:
                if bb > lo:
                    ts.add(inv.evaluate_exact(bb))
                bb += 2
        grid = sorted(t for t in ts if -1 <= t <= 1)
        if grid[0] != -1:
            grid.insert(0, Fraction(-1))
        if grid[-1] != 1:
            grid.append(Fraction(1))
        if len(grid) > COMPOSE_BREAKPOINT_CAP:
            raise InvalidHomeomorphismError("composition exceeds the breakpoint cap")
        pairs = [(t, self.evaluate_exact(other.evaluate_exact(t))) for t in grid]
        return CircleHomeomorphism(_simplify_collinear(pairs))

    def rotate_normalize(self) -> "CircleHomeomorphism":
        """Post-compose with a rotation so the result fixes 0 exactly."""
        return CircleHomeomorphism.rotation(-self.evaluate_exact(Fraction(0))).compose(self)

    # -- structure ---------------------------------------------------------

    @property
    def breakpoint_count(self) -> int:
        return len(self.ts)

    def fixes_basepoint(self) -> bool:
        return self.hs[0] == -1

    def max_slope(self) -> float:
        dt = np.diff(self._tf)
        dh = np.diff(self._hf)
        return float(np.max(dh / dt))

    def preimage_length(self, a: Fraction, b: Fraction) -> Fraction:
        """|h^{-1}([a, b])| in units of pi, for a lift interval [a, b]."""
        inv = self.invert()
        return inv.evaluate_exact(b) - inv.evaluate_exact(a)

    def to_json(self) -> dict:
        return {
            "breakpoints": [
                [t.numerator, t.denominator, h.numerator, h.denominator]
                for t, h in zip(self.ts, self.hs)
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CircleHomeomorphism":
        return cls([(Fraction(tn, td), Fraction(hn, hd)) for tn, td, hn, hd in obj["breakpoints"]])


def _interp_sorted(ts: list[Fraction], hs: list[Fraction], q: Fraction) -> Fraction:
    i = bisect.bisect_right(ts, q) - 1
    if i < 0:
        raise InvalidArgumentError("point below lift domain")
    if i >= len(ts) - 1:
        if q == ts[-1]:
            return hs[-1]
        raise InvalidArgumentError("point above lift domain")
    t1, t2 = ts[i], ts[i + 1]
    return hs[i] + (hs[i + 1] - hs[i]) * (q - t1) / (t2 - t1)


def _interp_pairs(pairs: list[tuple[Fraction, Fraction]], q: Fraction) -> Fraction:
    ts = [t for t, _ in pairs]
    hs = [h for _, h in pairs]
    return _interp_sorted(ts, hs, q)


def _simplify_collinear(pairs: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    if len(pairs) <= 2:
        return pairs
    out = [pairs[0]]
    for p in pairs[1:-1]:
        t1, h1 = out[-1]
        t2, h2 = p
        # keep p unless it is collinear with its neighbors
        out.append(p)
        if len(out) >= 3:
            (ta, ha), (tb, hb), (tc, hc) = out[-3], out[-2], out[-1]
            if (hb - ha) * (tc - tb) == (hc - hb) * (tb - ta):
                out.pop(-2)
    out.append(pairs[-1])
    if len(out) >= 3:
        (ta, ha), (tb, hb), (tc, hc) = out[-3], out[-2], out[-1]
        if (hb - ha) * (tc - tb) == (hc - hb) * (tb - ta):
            out.pop(-2)
    return out


# ---------------------------------------------------------------------------
# staircases over Cantor schemes
# ---------------------------------------------------------------------------


@dataclass
class MonotoneStep:
    """Finite-depth staircase of a scheme: continuous, non-decreasing,
    constant on complementary intervals, rising 0 -> 2pi across the
    retained set.  ``plateaus`` are the gap values (units of pi) and
    ``truncation`` bounds the sup distance to the depth-limit staircase."""

    scheme: CantorScheme
    plateaus: list[Fraction]
    truncation: Fraction
    pairs: list[tuple[Fraction, Fraction]]  # ramp realization on [0, 2]

    def evaluate_exact(self, q: Fraction) -> Fraction:
        q = Fraction(q)
        ts = [t for t, _ in self.pairs]
        hs = [h for _, h in self.pairs]
        if q <= ts[0]:
            return hs[0]
        if q >= ts[-1]:
            return hs[-1]
        return _interp_sorted(ts, hs, q)


def cantor_step_function(scheme: CantorScheme) -> MonotoneStep:
    """Canonical staircase: the i-th of M retained intervals ramps from
    2i/M to 2(i+1)/M (units of pi), gaps are plateaus at 2*rank/M."""
    deepest = scheme.deepest()
    m = len(deepest)
    if m == 0:
        raise InvalidSchemeError("scheme has no retained intervals")
    pairs: list[tuple[Fraction, Fraction]] = []

    def push(t: Fraction, v: Fraction) -> None:
        if pairs and pairs[-1][0] == t:
            return
        pairs.append((t, v))

    push(Fraction(0), Fraction(0))
    lo, hi = scheme.ambient
    if lo > 0:
        push(lo, Fraction(0))
    for i, (a, b) in enumerate(deepest):
        if b == a:
            raise InvalidSchemeError("staircase needs nondegenerate retained intervals")
        push(a, Fraction(2 * i, m))
        push(b, Fraction(2 * (i + 1), m))
    if hi < 2:
        push(hi, Fraction(2))
    push(Fraction(2), Fraction(2))
    step = MonotoneStep(scheme, [], Fraction(2, m), pairs)
    step.plateaus = [step.evaluate_exact((a + b) / 2) for a, b in scheme.gaps()]
    return step


@dataclass
class SeriesRecord:
    weight_sum: Fraction
    blend: Fraction
    breakpoints: int
    truncation_sup: float  # sup-norm bound: staircase depth + blend


def series_homeomorphism(
    family: Sequence[tuple[MonotoneStep, Fraction]],
    blend: Fraction = Fraction(1, 2**60),
) -> tuple[CircleHomeomorphism, SeriesRecord]:
    """h = sum_k delta_k h_k over ramp staircases, made strictly
    increasing by mixing in ``blend`` of the identity:
    h = (1 - blend) * sum + blend * id.  Weights must sum to 1 exactly
    (counting multiplicity), which makes h map the circle onto itself."""
    if not family:
        raise InvalidWeightsError("empty staircase family")
    weights = [Fraction(w) for _, w in family]
    total = sum(weights)
    if total != 1:
        raise InvalidWeightsError(f"weights sum to {total}, expected exactly 1")
    blend = Fraction(blend)
    if not (0 < blend < 1):
        raise InvalidWeightsError("blend must lie in (0, 1)")
    ts: set[Fraction] = {Fraction(0), Fraction(2)}
    for step, _ in family:
        ts.update(t for t, _ in step.pairs)
    grid = sorted(ts)
    values = []
    for t in grid:
        s = Fraction(0)
        for step, w in family:
            s += w * step.evaluate_exact(t)
        values.append((1 - blend) * s + blend * t)
    pairs = [(t - 1, v - 1) for t, v in zip(grid, values)]
    pairs = _simplify_collinear(pairs)
    h = CircleHomeomorphism(pairs)
    trunc = float(sum((w * step.truncation for step, w in family), Fraction(0)))
    rec = SeriesRecord(total, blend, len(pairs), trunc * math.pi + float(blend) * TWO_PI)
    return h, rec


# ---------------------------------------------------------------------------
# composition of functions with homeomorphisms
# ---------------------------------------------------------------------------


class ComposedDescriptor(Descriptor):
    """f composed with h, for a harmonic-sum f and an exact PL homeomorphism."""

    kind = "composed"

    def __init__(self, inner: Descriptor, homeo: CircleHomeomorphism):
        self.inner = inner
        self.homeo = homeo

    def evaluate(self, t):
        return self.inner.evaluate(self.homeo.evaluate(t))

    @property
    def has_exact_spectrum(self) -> bool:
        return isinstance(self.inner, (TrigPolynomial, LacunaryCosine))

    def _harmonics(self) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.inner, TrigPolynomial):
            d = self.inner.degree
            ns = np.arange(-d, d + 1)
            c = self.inner.spectrum(d)
        elif isinstance(self.inner, LacunaryCosine):
            k = int(self.inner.freqs.max()) if len(self.inner.freqs) else 1
            ns = np.arange(-k, k + 1)
            c = self.inner.spectrum(k)
            keep = np.abs(c) > 0
            ns, c = ns[keep], c[keep]
        else:
            raise InvalidArgumentError("no harmonic representation available")
        return ns, c

    def spectrum(self, k_max):
        ns, cs = self._harmonics()
        ts = self.homeo._tf
        hs = self.homeo._hf
        ks = np.arange(-k_max, k_max + 1)
        out = np.zeros(2 * k_max + 1, dtype=complex)
        for j in range(len(ts) - 1):
            a, b = ts[j], ts[j + 1]
            if b <= a:
                continue
            m = (hs[j + 1] - hs[j]) / (b - a)
            c0 = hs[j] - m * a
            for n, cn in zip(ns, cs):
                # c_n e^{i n (m t + c0)} integrated against e^{-i k t}
                out += cn * np.exp(1j * n * c0) * _exp_integral(n * m - ks, a, b)
        return out / TWO_PI

    def antiderivative(self, t):
        ts = self.homeo._tf
        hs = self.homeo._hf
        m = np.diff(hs) / np.diff(ts)
        fa = self.inner.antiderivative(hs[:-1])
        fb = self.inner.antiderivative(hs[1:])
        seg = (fb - fa) / m
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        t = np.asarray(t, dtype=float)
        u = np.mod(t + math.pi, TWO_PI) - math.pi
        i = np.clip(np.searchsorted(ts, u, side="right") - 1, 0, len(ts) - 2)
        hu = hs[i] + m[i] * (u - ts[i])
        partial = (self.inner.antiderivative(hu) - fa[i]) / m[i]
        base = np.round((t - u) / TWO_PI) * cum[-1]
        return cum[i] + partial + base

    def to_json(self):
        return {"kind": self.kind, "inner": self.inner.to_json(), "homeo": self.homeo.to_json()}

    @classmethod
    def _from_json(cls, obj):
        return cls(Descriptor.from_json(obj["inner"]), CircleHomeomorphism.from_json(obj["homeo"]))


from .core import _DESCRIPTOR_KINDS

_DESCRIPTOR_KINDS[ComposedDescriptor.kind] = ComposedDescriptor


def compose_function(f: CircleFunction, h: CircleHomeomorphism, grid_size: Optional[int] = None) -> CircleFunction:
    """f composed with h as a CircleFunction; piecewise descriptors pull
    back exactly through the inverse homeomorphism."""
    n = grid_size or f.grid_size
    desc = f.descriptor
    if isinstance(desc, (PiecewiseLinear, PiecewiseConstant, SineOfPiecewiseLinear)):
        inner_pl = desc.inner if isinstance(desc, SineOfPiecewiseLinear) else desc
        hinv = h.invert()
        breaks: set[Fraction] = set()
        for q in inner_pl.breaks:
            t = hinv.evaluate_exact(q)
            breaks.add(((t + 1) % 2) - 1)
        if not isinstance(desc, PiecewiseConstant):
            for t in h.ts:
                if -1 <= t < 1:
                    breaks.add(t)
        grid = sorted(breaks)
        if isinstance(desc, PiecewiseConstant):
            vals = [desc_value_exact(desc, h.evaluate_exact(t)) for t in grid]
            new_desc: Descriptor = PiecewiseConstant(grid, vals)
        else:
            vals = [pl_value_exact(inner_pl, h.evaluate_exact(t)) for t in grid]
            new_pl = PiecewiseLinear(grid, vals)
            new_desc = SineOfPiecewiseLinear(new_pl) if isinstance(desc, SineOfPiecewiseLinear) else new_pl
        return CircleFunction.from_descriptor(new_desc, n)
    if isinstance(desc, (TrigPolynomial, LacunaryCosine)):
        return CircleFunction.from_descriptor(ComposedDescriptor(desc, h), n)
    from .core import _as_grid

    return CircleFunction(f.evaluate(h.evaluate(_as_grid(n))))


def pl_value_exact(pl: PiecewiseLinear, q: Fraction) -> Fraction:
    return pl.evaluate_exact(q)


def desc_value_exact(pwc: PiecewiseConstant, q: Fraction) -> Fraction:
    q = Fraction(q)
    shift = (q - pwc.breaks[0]) % 2
    q0 = pwc.breaks[0] + shift
    i = bisect.bisect_right(pwc.breaks, q0) - 1
    return pwc.values[i]


# ---------------------------------------------------------------------------
# arc-length reparametrization
# ---------------------------------------------------------------------------


def arclength_reparam(
    f: CircleFunction,
    variation_cap: float = 1e6,
    denom_pow: int = 40,
) -> tuple[CircleHomeomorphism, float]:
    """Homeomorphism psi making f compose psi Lipschitz.

    psi inverts s(t) = normalized(t + Var(f on [-pi, t])); the returned
    constant L = (2pi + Var)/(2pi) (with the variation rounded up to a
    dyadic rational so psi stays exactly rational) satisfies
    |f(psi(t1)) - f(psi(t2))| <= L |t1 - t2| for all t1, t2."""
    if isinstance(f.descriptor, PiecewiseLinear):
        breaks = list(f.descriptor.breaks)
        vals = [float(v) for v in f.descriptor.values]
        vals.append(vals[0])
    else:
        grid = f.grid
        breaks = [Fraction(-1) + Fraction(2 * j, f.grid_size) for j in range(f.grid_size)]
        vals = list(map(float, f.samples)) + [float(f.samples[0])]
    scale = Fraction(1, 2**denom_pow)
    pieces: list[Fraction] = []
    for v1, v2 in zip(vals, vals[1:]):
        w = float_to_fraction(abs(v2 - v1) / math.pi)
        pieces.append(-((-w) // scale) * scale)  # ceil to the dyadic grid
    w_tot = sum(pieces, Fraction(0))
    if float(w_tot) * math.pi > variation_cap:
        raise UnboundedVariationError(f"variation {float(w_tot) * math.pi:.3e} beyond the cap")
    factor = Fraction(2) / (2 + w_tot)
    pairs = []
    acc = Fraction(0)
    for q, w in zip(breaks, [Fraction(0)] + pieces):
        acc += w
        s = -1 + (q + 1 + acc) * factor
        pairs.append((q, s))
    pairs.append((Fraction(1), Fraction(1)))
    s_map = CircleHomeomorphism(_simplify_collinear(pairs))
    psi = s_map.invert()
    L = float((2 + w_tot) / 2)
    return psi, L


def lipschitz_transfer_check(values: np.ndarray, bound: float, chord: bool = False) -> tuple[bool, float]:
    """Check |v_i - v_j| <= bound * d(t_i, t_j) over all grid pairs, with
    d either the circle distance or the chord |e^{i t_i} - e^{i t_j}|."""
    n = len(values)
    h = TWO_PI / n
    worst = 0.0
    for s in range(1, n // 2 + 1):
        diff = float(np.max(np.abs(np.roll(values, -s) - values)))
        dist = 2.0 * math.sin(0.5 * s * h) if chord else s * h
        worst = max(worst, diff / dist)
    return worst <= bound * (1 + 1e-9), worst


# ---------------------------------------------------------------------------
# selection of minimal-preimage cells (pigeonhole searches)
# ---------------------------------------------------------------------------


def min_preimage_cell(
    h: CircleHomeomorphism,
    window: tuple[Fraction, Fraction],
    n_cells: int,
    allowed_ranges: Sequence[tuple[int, int]],
) -> tuple[int, Fraction]:
    """Index (leftmost on ties) and exact preimage length of the cell with
    minimal |h^{-1}(cell)| among equal cells partitioning the window.

    ``allowed_ranges`` are half-open index ranges eligible for selection.
    The search only probes cells straddling a breakpoint of h^{-1} plus
    one representative per linear piece, which realizes the exact min."""
    a, b = Fraction(window[0]), Fraction(window[1])
    if not (-1 <= a < b <= 1):
        raise InvalidArgumentError("window must lie within one lift period")
    w = (b - a) / n_cells
    inv = h.invert()

    def cell_measure(i: int) -> Fraction:
        return inv.evaluate_exact(a + (i + 1) * w) - inv.evaluate_exact(a + i * w)

    candidates: set[int] = set()
    for rng_lo, rng_hi in allowed_ranges:
        if rng_lo < rng_hi:
            candidates.add(rng_lo)
    for t in inv.ts:
        if a < t < b:
            i = int((t - a) // w)
            for j in (i - 1, i, i + 1):
                if 0 <= j < n_cells and any(lo <= j < hi for lo, hi in allowed_ranges):
                    candidates.add(j)
    # one representative cell per linear piece of h^{-1} inside each range
    kink_cells = sorted({int((t - a) // w) for t in inv.ts if a < t < b})
    for rng_lo, rng_hi in allowed_ranges:
        prev = rng_lo
        for kc in kink_cells + [rng_hi]:
            if kc > prev and prev < rng_hi:
                candidates.add(prev)
            prev = max(prev, kc + 1)
            if prev >= rng_hi:
                break
    best_i, best_m = -1, None
    for i in sorted(candidates):
        m = cell_measure(i)
        if best_m is None or m < best_m:
            best_i, best_m = i, m
    return best_i, best_m


def random_homeomorphism(rng: np.random.Generator, n_interior: int = 14, denom_pow: int = 16) -> CircleHomeomorphism:
    """Seeded random normalized homeomorphism with dyadic breakpoints."""
    denom = 1 << denom_pow
    while True:
        ts = sorted(rng.choice(denom - 1, size=n_interior, replace=False) + 1)
        hs = sorted(rng.choice(denom - 1, size=n_interior, replace=False) + 1)
        pairs = [(Fraction(-1), Fraction(-1))]
        pairs += [
            (Fraction(-1) + Fraction(2 * int(t), denom), Fraction(-1) + Fraction(2 * int(v), denom))
            for t, v in zip(ts, hs)
        ]
        pairs.append((Fraction(1), Fraction(1)))
        try:
            return CircleHomeomorphism(pairs)
        except InvalidHomeomorphismError:  # pragma: no cover - duplicates re-rolled
            continue
