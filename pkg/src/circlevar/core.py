"""Circle functions, Fourier analysis, moduli of continuity and seminorms.

Functions live on the circle T identified with [-pi, pi), sampled on a
uniform power-of-two grid and optionally backed by a closed-form
descriptor.  Descriptors carry exact per-segment integration, which is
what makes spectra of discontinuous functions and Stieltjes pairings
trustworthy; plain grid quadrature is reserved for smooth data.

Exact rational coordinates (breakpoints of piecewise descriptors) are
stored in units of pi, see `circlevar.exact`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import (
    InvalidArgumentError,
    InvalidDataError,
    NumericFailureError,
    UnsupportedIntegratorError,
)

TWO_PI = 2.0 * math.pi

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _as_grid(n: int) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(n) / n


def _validate_grid_size(n: int) -> None:
    if n < 8 or n & (n - 1):
        raise InvalidArgumentError(f"grid_size must be a power of two >= 8, got {n}")


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


class Descriptor:
    """Closed-form representation behind a sampled circle function."""

    kind = "abstract"
    continuous = True
    has_exact_spectrum = True

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spectrum(self, k_max: int) -> np.ndarray:
        """Exact coefficients for k in [-k_max, k_max]."""
        raise NotImplementedError

    def antiderivative(self, t: np.ndarray) -> np.ndarray:
        """F(t) = integral of f from -pi to t, for t in [-pi, pi]."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(obj: dict) -> "Descriptor":
        kind = obj["kind"]
        cls = _DESCRIPTOR_KINDS.get(kind)
        if cls is None:
            raise InvalidDataError(f"unknown descriptor kind {kind!r}")
        return cls._from_json(obj)


class TrigPolynomial(Descriptor):
    """a0 + sum_k (a_k cos kt + b_k sin kt), real coefficients."""

    kind = "trig"

    def __init__(self, a0: float = 0.0, cos: Sequence[float] = (), sin: Sequence[float] = ()):
        self.a0 = float(a0)
        d = max(len(cos), len(sin))
        self.cos = np.zeros(d)
        self.sin = np.zeros(d)
        self.cos[: len(cos)] = cos
        self.sin[: len(sin)] = sin
        self.degree = d
        self._basis: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.a0)
        for k in range(1, self.degree + 1):
            out += self.cos[k - 1] * np.cos(k * t) + self.sin[k - 1] * np.sin(k * t)
        return out

    def _grid_basis(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        cached = self._basis.get(n)
        if cached is None:
            kt = np.outer(np.arange(1, self.degree + 1), _as_grid(n))
            cached = (np.cos(kt), np.sin(kt))
            self._basis[n] = cached
        return cached

    def shifted_grid_values(self, n: int, delta: float) -> np.ndarray:
        """Values at grid + delta via angle-addition on a cached basis."""
        C, S = self._grid_basis(n)
        ks = np.arange(1, self.degree + 1)
        cd, sd = np.cos(ks * delta), np.sin(ks * delta)
        ccoef = self.cos * cd + self.sin * sd
        scoef = self.sin * cd - self.cos * sd
        return self.a0 + ccoef @ C + scoef @ S

    def derivative_values(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for k in range(1, self.degree + 1):
            out += -self.cos[k - 1] * k * np.sin(k * t) + self.sin[k - 1] * k * np.cos(k * t)
        return out

    def spectrum(self, k_max):
        c = np.zeros(2 * k_max + 1, dtype=complex)
        c[k_max] = self.a0
        for k in range(1, min(self.degree, k_max) + 1):
            ck = 0.5 * (self.cos[k - 1] - 1j * self.sin[k - 1])
            c[k_max + k] = ck
            c[k_max - k] = np.conj(ck)
        return c

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        out = self.a0 * (t + math.pi)
        for k in range(1, self.degree + 1):
            out += self.cos[k - 1] * np.sin(k * t) / k
            out -= self.sin[k - 1] * (np.cos(k * t) - math.cos(k * math.pi)) / k
        return out

    def to_json(self):
        return {"kind": self.kind, "a0": self.a0, "cos": list(self.cos), "sin": list(self.sin)}

    @classmethod
    def _from_json(cls, obj):
        return cls(obj.get("a0", 0.0), obj.get("cos", ()), obj.get("sin", ()))


class LacunaryCosine(Descriptor):
    """c0 + sum_j w_j cos(base**j * t) over j = j0 .. j0+len(w)-1."""

    kind = "lacunary"

    def __init__(self, base: int, weights: Sequence[float], j0: int = 0, c0: float = 0.0):
        if base < 2:
            raise InvalidArgumentError("lacunary base must be >= 2")
        self.base = int(base)
        self.weights = np.asarray(weights, dtype=float)
        self.j0 = int(j0)
        self.c0 = float(c0)
        self.freqs = np.array([self.base ** (self.j0 + j) for j in range(len(self.weights))], dtype=np.int64)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.c0)
        for w, n in zip(self.weights, self.freqs):
            out += w * np.cos(n * t)
        return out

    def derivative_values(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for w, n in zip(self.weights, self.freqs):
            out -= w * n * np.sin(n * t)
        return out

    def spectrum(self, k_max):
        c = np.zeros(2 * k_max + 1, dtype=complex)
        c[k_max] = self.c0
        for w, n in zip(self.weights, self.freqs):
            if n <= k_max:
                c[k_max + n] += 0.5 * w
                c[k_max - n] += 0.5 * w
        return c

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        out = self.c0 * (t + math.pi)
        for w, n in zip(self.weights, self.freqs):
            out += w * np.sin(n * t) / n
        return out

    def variation_per_term(self) -> np.ndarray:
        """Total variation contributed by each cosine term (4 * |w| * freq)."""
        return 4.0 * np.abs(self.weights) * self.freqs

    def to_json(self):
        return {
            "kind": self.kind,
            "base": self.base,
            "weights": list(self.weights),
            "j0": self.j0,
            "c0": self.c0,
        }

    @classmethod
    def _from_json(cls, obj):
        return cls(obj["base"], obj["weights"], obj.get("j0", 0), obj.get("c0", 0.0))


def _check_breaks(breaks: Sequence[Fraction]) -> list[Fraction]:
    bs = [Fraction(b) for b in breaks]
    if not bs:
        raise InvalidArgumentError("empty breakpoint list")
    if any(b < -1 or b >= 1 for b in bs):
        raise InvalidArgumentError("breakpoints must lie in [-1, 1) in units of pi")
    if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
        raise InvalidArgumentError("breakpoints must be strictly increasing")
    return bs


class PiecewiseLinear(Descriptor):
    """Continuous piecewise-linear periodic function.

    ``breaks`` are strictly increasing rationals in [-1, 1) (units of pi);
    ``values`` are the function values at the breakpoints.  The last
    segment wraps around to breaks[0] + 2.
    """

    kind = "piecewise_linear"

    def __init__(self, breaks: Sequence[Fraction], values: Sequence):
        self.breaks = _check_breaks(breaks)
        if len(values) != len(self.breaks):
            raise InvalidArgumentError("values/breaks length mismatch")
        self.values = [Fraction(v) if not isinstance(v, Fraction) else v for v in values]
        self._tq = np.array([float(b) for b in self.breaks]) * math.pi
        self._tv = np.array([float(v) for v in self.values])
        # periodic extension nodes for interpolation
        self._xp = np.concatenate([self._tq, [self._tq[0] + TWO_PI]])
        self._fp = np.concatenate([self._tv, [self._tv[0]]])

    @property
    def float_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return self._tq, self._tv

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        u = np.mod(t - self._xp[0], TWO_PI) + self._xp[0]
        return np.interp(u, self._xp, self._fp)

    def evaluate_exact(self, q: Fraction) -> Fraction:
        """Exact value at the point q*pi (q rational)."""
        q = Fraction(q)
        shift = (q - self.breaks[0]) % 2
        q = self.breaks[0] + shift
        import bisect

        i = bisect.bisect_right(self.breaks, q) - 1
        a = self.breaks[i]
        va = self.values[i]
        if i + 1 < len(self.breaks):
            b, vb = self.breaks[i + 1], self.values[i + 1]
        else:
            b, vb = self.breaks[0] + 2, self.values[0]
        if q == a:
            return va
        return va + (vb - va) * (q - a) / (b - a)

    def _segments(self):
        """Arrays (a, b, va, vb) of segment endpoints in radians."""
        a = self._tq
        b = np.concatenate([self._tq[1:], [self._tq[0] + TWO_PI]])
        va = self._tv
        vb = np.concatenate([self._tv[1:], [self._tv[0]]])
        return a, b, va, vb

    def spectrum(self, k_max):
        a, b, va, vb = self._segments()
        keep = b > a
        a, b, va, vb = a[keep], b[keep], va[keep], vb[keep]
        m = (vb - va) / (b - a)
        c0 = va - m * a
        return _segment_spectrum_linear(a, b, c0, m, k_max)

    def antiderivative(self, t):
        a, b, va, vb = self._segments()
        w = b - a
        seg_int = 0.5 * (va + vb) * w
        cum = np.concatenate([[0.0], np.cumsum(seg_int)])
        t = np.asarray(t, dtype=float)
        u = np.mod(t - a[0], TWO_PI) + a[0]
        i = np.clip(np.searchsorted(a, u, side="right") - 1, 0, len(a) - 1)
        dt = u - a[i]
        m = (vb - va) / np.where(w > 0, w, 1.0)
        partial = va[i] * dt + 0.5 * m[i] * dt * dt
        # anchored at the first breakpoint; only differences are used
        base_shift = np.round((t - u) / TWO_PI) * cum[-1]
        return cum[i] + partial + base_shift

    def total_variation(self) -> Fraction:
        var = Fraction(0)
        vals = self.values + [self.values[0]]
        for v1, v2 in zip(vals, vals[1:]):
            var += abs(v2 - v1)
        return var

    def to_json(self):
        return {
            "kind": self.kind,
            "breaks": [[b.numerator, b.denominator] for b in self.breaks],
            "values": [[v.numerator, v.denominator] for v in self.values],
        }

    @classmethod
    def _from_json(cls, obj):
        breaks = [Fraction(n, d) for n, d in obj["breaks"]]
        values = [Fraction(n, d) for n, d in obj["values"]]
        return cls(breaks, values)


class PiecewiseConstant(Descriptor):
    """Right-continuous step function; value[i] holds on [breaks[i], breaks[i+1])."""

    kind = "piecewise_constant"
    continuous = False

    def __init__(self, breaks: Sequence[Fraction], values: Sequence):
        self.breaks = _check_breaks(breaks)
        if len(values) != len(self.breaks):
            raise InvalidArgumentError("values/breaks length mismatch")
        self.values = [Fraction(v) if not isinstance(v, Fraction) else v for v in values]
        self._tq = np.array([float(b) for b in self.breaks]) * math.pi
        self._tv = np.array([float(v) for v in self.values])

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        u = np.mod(t - self._tq[0], TWO_PI) + self._tq[0]
        i = np.clip(np.searchsorted(self._tq, u, side="right") - 1, 0, len(self._tq) - 1)
        return self._tv[i]

    def spectrum(self, k_max):
        a = self._tq
        b = np.concatenate([self._tq[1:], [self._tq[0] + TWO_PI]])
        keep = b > a
        return _segment_spectrum_linear(
            a[keep], b[keep], self._tv[keep], np.zeros(keep.sum()), k_max
        )

    def antiderivative(self, t):
        a = self._tq
        b = np.concatenate([a[1:], [a[0] + TWO_PI]])
        seg_int = self._tv * (b - a)
        cum = np.concatenate([[0.0], np.cumsum(seg_int)])
        t = np.asarray(t, dtype=float)
        u = np.mod(t - a[0], TWO_PI) + a[0]
        i = np.clip(np.searchsorted(a, u, side="right") - 1, 0, len(a) - 1)
        partial = self._tv[i] * (u - a[i])
        base_shift = np.round((t - u) / TWO_PI) * cum[-1]
        return cum[i] + partial + base_shift

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._tv)))

    def to_json(self):
        return {
            "kind": self.kind,
            "breaks": [[b.numerator, b.denominator] for b in self.breaks],
            "values": [[v.numerator, v.denominator] for v in self.values],
        }

    @classmethod
    def _from_json(cls, obj):
        breaks = [Fraction(n, d) for n, d in obj["breaks"]]
        values = [Fraction(n, d) for n, d in obj["values"]]
        return cls(breaks, values)


class SineOfPiecewiseLinear(Descriptor):
    """sin(pi * p(t)) for a piecewise-linear p; stays exactly integrable."""

    kind = "sin_pi_pl"

    def __init__(self, inner: PiecewiseLinear):
        self.inner = inner

    def evaluate(self, t):
        return np.sin(math.pi * self.inner.evaluate(t))

    def spectrum(self, k_max):
        a, b, va, vb = self.inner._segments()
        keep = b > a
        a, b, va, vb = a[keep], b[keep], va[keep], vb[keep]
        m = (vb - va) / (b - a)
        c0 = va - m * a
        ks = np.arange(-k_max, k_max + 1)
        out = np.zeros(2 * k_max + 1, dtype=complex)
        # sin(pi(c+mt)) = (e^{i pi c} e^{i pi m t} - e^{-i pi c} e^{-i pi m t}) / 2i
        for j in range(len(a)):
            A = math.pi * m[j]
            B = math.pi * c0[j]
            e_plus = _exp_integral(A - ks, a[j], b[j])
            e_minus = _exp_integral(-A - ks, a[j], b[j])
            out += (np.exp(1j * B) * e_plus - np.exp(-1j * B) * e_minus) / 2j
        return out / TWO_PI

    def antiderivative(self, t):
        a, b, va, vb = self.inner._segments()
        w = b - a
        m = (vb - va) / np.where(w > 0, w, 1.0)
        seg_int = np.where(
            np.abs(m) > 1e-300,
            (np.cos(math.pi * va) - np.cos(math.pi * vb)) / (math.pi * m),
            np.sin(math.pi * va) * w,
        )
        cum = np.concatenate([[0.0], np.cumsum(seg_int)])
        t = np.asarray(t, dtype=float)
        u = np.mod(t - a[0], TWO_PI) + a[0]
        i = np.clip(np.searchsorted(a, u, side="right") - 1, 0, len(a) - 1)
        vu = va[i] + m[i] * (u - a[i])
        partial = np.where(
            np.abs(m[i]) > 1e-300,
            (np.cos(math.pi * va[i]) - np.cos(math.pi * vu)) / (math.pi * m[i]),
            np.sin(math.pi * va[i]) * (u - a[i]),
        )
        base_shift = np.round((t - u) / TWO_PI) * cum[-1]
        return cum[i] + partial + base_shift

    def to_json(self):
        return {"kind": self.kind, "inner": self.inner.to_json()}

    @classmethod
    def _from_json(cls, obj):
        return cls(PiecewiseLinear._from_json(obj["inner"]))


_DESCRIPTOR_KINDS = {
    cls.kind: cls
    for cls in (TrigPolynomial, LacunaryCosine, PiecewiseLinear, PiecewiseConstant, SineOfPiecewiseLinear)
}


def _exp_integral(omega: np.ndarray, a: float, b: float) -> np.ndarray:
    """integral_a^b e^{i w t} dt, elementwise in w, stable near w = 0."""
    omega = np.asarray(omega, dtype=float)
    small = np.abs(omega) * (abs(b - a)) < 1e-8
    w = np.where(small, 1.0, omega)
    out = (np.exp(1j * w * b) - np.exp(1j * w * a)) / (1j * w)
    if np.any(small):
        ws = omega[small]
        mid = 0.5 * (a + b)
        # (b-a) e^{iw mid} sinc(w(b-a)/2), two series terms suffice here
        out[small] = (b - a) * np.exp(1j * ws * mid) * (1.0 - (ws * (b - a)) ** 2 / 24.0)
    return out


def _segment_spectrum_linear(a, b, c0, m, k_max) -> np.ndarray:
    """Exact coefficients of sum of segments (c0 + m t) on [a, b]."""
    ks = np.arange(-k_max, k_max + 1)
    out = np.zeros(2 * k_max + 1, dtype=complex)
    nz = ks != 0
    kk = ks[nz].astype(float)
    # antiderivative of (c+mt)e^{-ikt}: e^{-ikt} (i(c+mt)/k + m/k^2)
    for j in range(len(a)):
        ea = np.exp(-1j * kk * a[j])
        eb = np.exp(-1j * kk * b[j])
        fa = ea * (1j * (c0[j] + m[j] * a[j]) / kk + m[j] / kk**2)
        fb = eb * (1j * (c0[j] + m[j] * b[j]) / kk + m[j] / kk**2)
        out[nz] += fb - fa
        out[k_max] += c0[j] * (b[j] - a[j]) + 0.5 * m[j] * (b[j] ** 2 - a[j] ** 2)
    return out / TWO_PI


# ---------------------------------------------------------------------------
# CircleFunction / FourierSpectrum
# ---------------------------------------------------------------------------


class CircleFunction:
    """Real function on the circle: samples on a uniform grid plus an
    optional closed-form descriptor that the samples must match."""

    def __init__(self, samples, descriptor: Optional[Descriptor] = None, check: bool = True):
        self.samples = np.asarray(samples, dtype=float)
        self.grid_size = len(self.samples)
        _validate_grid_size(self.grid_size)
        self.descriptor = descriptor
        if not np.all(np.isfinite(self.samples)):
            raise InvalidDataError("samples contain non-finite values")
        if check and descriptor is not None:
            ref = descriptor.evaluate(self.grid)
            err = float(np.max(np.abs(ref - self.samples)))
            if err > 1e-12 * max(1.0, float(np.max(np.abs(ref)))):
                raise InvalidDataError(f"samples disagree with descriptor by {err:.3e}")

    @property
    def grid(self) -> np.ndarray:
        return _as_grid(self.grid_size)

    @classmethod
    def from_descriptor(cls, descriptor: Descriptor, grid_size: int) -> "CircleFunction":
        _validate_grid_size(grid_size)
        return cls(descriptor.evaluate(_as_grid(grid_size)), descriptor, check=False)

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid_size: int) -> "CircleFunction":
        _validate_grid_size(grid_size)
        return cls(np.asarray(fn(_as_grid(grid_size)), dtype=float))

    def evaluate(self, t) -> np.ndarray:
        """Pointwise values; closed form when a descriptor is present,
        periodic linear interpolation of the samples otherwise."""
        if self.descriptor is not None:
            return self.descriptor.evaluate(t)
        t = np.asarray(t, dtype=float)
        xp = np.concatenate([self.grid, [math.pi]])
        fp = np.concatenate([self.samples, [self.samples[0]]])
        u = np.mod(t + math.pi, TWO_PI) - math.pi
        return np.interp(u, xp, fp)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def oscillation(self) -> float:
        return float(np.max(self.samples) - np.min(self.samples))

    def to_json(self) -> dict:
        obj = {"grid_size": self.grid_size, "samples": list(map(float, self.samples))}
        if self.descriptor is not None:
            obj["descriptor"] = self.descriptor.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "CircleFunction":
        desc = Descriptor.from_json(obj["descriptor"]) if obj.get("descriptor") else None
        return cls(np.asarray(obj["samples"], dtype=float), desc)


class FourierSpectrum:
    """Coefficients x^(k) for k in [-K, K]."""

    def __init__(self, coeffs, k_max: Optional[int] = None):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if k_max is None:
            k_max = (len(self.coeffs) - 1) // 2
        if len(self.coeffs) != 2 * k_max + 1:
            raise InvalidArgumentError("coefficient array must have length 2K+1")
        self.k_max = k_max

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.k_max:
            raise InvalidArgumentError(f"|k| = {abs(k)} exceeds window {self.k_max}")
        return complex(self.coeffs[self.k_max + k])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol)

    def to_json(self) -> dict:
        return {
            "max_index": self.k_max,
            "re": list(map(float, self.coeffs.real)),
            "im": list(map(float, self.coeffs.imag)),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FourierSpectrum":
        c = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return cls(c, obj["max_index"])


# ---------------------------------------------------------------------------
# moduli of continuity and weight sequences
# ---------------------------------------------------------------------------


class ModulusOfContinuity:
    """Concave-type modulus on [0, pi]: power delta^a, log-power
    (log 1/delta)^(-a), or a tabulated monotone profile."""

    def __init__(self, kind: str, a: float = 0.5, table: Optional[tuple] = None, doubling: Optional[bool] = None):
        if kind not in ("power", "log_power", "tabulated"):
            raise InvalidArgumentError(f"unknown modulus kind {kind!r}")
        self.kind = kind
        self.a = float(a)
        if kind == "power" and not (0 < self.a <= 1):
            raise InvalidArgumentError("power modulus needs 0 < a <= 1")
        if kind == "log_power" and self.a <= 0:
            raise InvalidArgumentError("log-power modulus needs a > 0")
        self.table = table
        if doubling is None:
            doubling = kind == "power"
        self.doubling = doubling

    @classmethod
    def power(cls, a: float) -> "ModulusOfContinuity":
        return cls("power", a)

    @classmethod
    def log_power(cls, a: float) -> "ModulusOfContinuity":
        return cls("log_power", a, doubling=True)

    def __call__(self, delta):
        d = np.asarray(delta, dtype=float)
        d = np.clip(d, 0.0, math.pi)
        if self.kind == "power":
            out = d**self.a
        elif self.kind == "log_power":
            with np.errstate(divide="ignore"):
                out = np.where(d > 0, np.log(1.0 / np.minimum(d, 0.5)) ** (-self.a), 0.0)
        else:
            xs, ys = self.table
            out = np.interp(d, xs, ys)
        return out if out.ndim else float(out)

    def inverse(self, y: float) -> float:
        """Largest delta with omega(delta) <= y (closed form kinds only)."""
        if y <= 0:
            return 0.0
        if self.kind == "power":
            return min(math.pi, y ** (1.0 / self.a))
        if self.kind == "log_power":
            return min(0.5, math.exp(-(y ** (-1.0 / self.a))))
        raise InvalidArgumentError("inverse unavailable for tabulated modulus")

    def check_monotone(self, levels: int = 24) -> bool:
        deltas = math.pi * 2.0 ** (-np.arange(levels, -1, -1, dtype=float))
        vals = self(deltas)
        return bool(np.all(np.diff(vals) >= -1e-15)) and self(0.0) == 0.0

    def check_doubling(self, levels: int = 24) -> bool:
        deltas = (math.pi / 2) * 2.0 ** (-np.arange(levels, dtype=float))
        return bool(np.all(self(2 * deltas) <= 2 * self(deltas) + 1e-15))


class WeightSequence:
    """Positive weights eps_n, n = 1..N, tending to zero on the stored range."""

    def __init__(self, entries, check_trend: bool = True):
        self.entries = np.asarray(entries, dtype=float)
        if len(self.entries) < 2:
            raise InvalidArgumentError("weight sequence needs at least two entries")
        if np.any(self.entries <= 0):
            raise InvalidArgumentError("weights must be positive")
        if check_trend and not self.entries[-1] < self.entries[0]:
            raise InvalidArgumentError("stored weights do not trend to zero")

    @classmethod
    def from_callable(cls, fn: Callable[[int], float], n_max: int, **kw) -> "WeightSequence":
        return cls([fn(n) for n in range(1, n_max + 1)], **kw)

    def __len__(self):
        return len(self.entries)

    def get(self, n: int) -> float:
        """eps_|n| with the convention eps_0 := eps_1."""
        n = abs(int(n))
        if n == 0:
            return float(self.entries[0])
        if n > len(self.entries):
            raise InvalidArgumentError(f"weight index {n} beyond stored range {len(self.entries)}")
        return float(self.entries[n - 1])

    def is_regular(self) -> tuple[bool, bool]:
        """(non-increasing, n*eps_n non-decreasing)."""
        e = self.entries
        n = np.arange(1, len(e) + 1)
        return bool(np.all(np.diff(e) <= 1e-15)), bool(np.all(np.diff(n * e) >= -1e-12))


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def compute_spectrum(f: CircleFunction, k_max: int, method: str = "auto") -> FourierSpectrum:
    """Fourier coefficients x^(k) = (1/2pi) int f(t) e^{-ikt} dt for |k| <= k_max.

    Descriptor-backed functions integrate exactly per segment/harmonic;
    sampled functions use the FFT of the grid values (spectrally accurate
    for smooth data, refused for discontinuous descriptors).
    """
    if k_max < 1:
        raise InvalidArgumentError("k_max must be positive")
    if k_max > f.grid_size // 2:
        raise InvalidArgumentError(
            f"k_max = {k_max} too large for grid {f.grid_size} (need k_max <= grid/2)"
        )
    if not np.all(np.isfinite(f.samples)):
        raise InvalidDataError("non-finite samples")
    desc = f.descriptor
    if method not in ("auto", "exact", "fft"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    if method == "fft" and desc is not None and not desc.continuous:
        raise InvalidDataError("grid FFT of a discontinuous function would alias; use exact integration")
    use_exact = desc is not None and method != "fft" and desc.has_exact_spectrum
    if method == "exact" and (desc is None or not desc.has_exact_spectrum):
        raise InvalidArgumentError("exact integration requires a closed-form descriptor")
    if use_exact:
        coeffs = desc.spectrum(k_max)
    else:
        fft = np.fft.fft(f.samples) / f.grid_size
        ks = np.arange(-k_max, k_max + 1)
        coeffs = (-1.0) ** ks * fft[np.mod(ks, f.grid_size)]
    # exact Hermitian symmetry for real input
    coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))
    return FourierSpectrum(coeffs, k_max)


def partial_sum(spectrum: FourierSpectrum, k: int, grid_size: int) -> CircleFunction:
    """Trig-polynomial partial sum S_k as a CircleFunction."""
    k = min(k, spectrum.k_max)
    a0 = spectrum.coefficient(0).real
    cos = [2 * spectrum.coefficient(j).real for j in range(1, k + 1)]
    sin = [-2 * spectrum.coefficient(j).imag for j in range(1, k + 1)]
    return CircleFunction.from_descriptor(TrigPolynomial(a0, cos, sin), grid_size)


def fejer_sum(spectrum: FourierSpectrum, n: int, grid_size: int) -> CircleFunction:
    """Cesaro mean sigma_n: coefficients damped by (1 - |k|/(n+1))."""
    n = min(n, spectrum.k_max)
    a0 = spectrum.coefficient(0).real
    cos, sin = [], []
    for j in range(1, n + 1):
        w = 1.0 - j / (n + 1.0)
        cos.append(2 * w * spectrum.coefficient(j).real)
        sin.append(-2 * w * spectrum.coefficient(j).imag)
    return CircleFunction.from_descriptor(TrigPolynomial(a0, cos, sin), grid_size)


# ---------------------------------------------------------------------------
# moduli of continuity of functions
# ---------------------------------------------------------------------------


def uniform_modulus(f: CircleFunction, delta: float) -> float:
    """sup |f(t1) - f(t2)| over grid pairs at circle distance < delta."""
    if delta <= 0:
        raise InvalidArgumentError("delta must be positive")
    if delta > TWO_PI:
        raise InvalidArgumentError("delta must be at most 2*pi")
    n = f.grid_size
    h = TWO_PI / n
    s_max = min(n // 2, int(math.ceil(delta / h)) - 1)
    best = 0.0
    x = f.samples
    for s in range(1, s_max + 1):
        d = float(np.max(np.abs(np.roll(x, -s) - x)))
        if d > best:
            best = d
    return best


def _pl_arrays(f: CircleFunction):
    d = f.descriptor
    if isinstance(d, PiecewiseLinear):
        return d._tq, d._tv, True
    if isinstance(d, PiecewiseConstant):
        return d._tq, d._tv, False
    return None


def _l1_shift_integral(f: CircleFunction, eps: float) -> float:
    """integral over T of |f(t + eps) - f(t)| dt."""
    pl = _pl_arrays(f)
    if pl is not None:
        tq, tv, _linear = pl
        nodes = np.concatenate([tq, np.mod(tq - eps + math.pi, TWO_PI) - math.pi])
        nodes = np.unique(nodes)
        widths = np.diff(np.concatenate([nodes, [nodes[0] + TWO_PI]]))
        keep = widths > 1e-15
        nodes, widths = nodes[keep], widths[keep]
        q1 = nodes + 0.25 * widths
        q2 = nodes + 0.50 * widths
        q3 = nodes + 0.75 * widths
        ev = f.descriptor.evaluate
        d1 = ev(q1 + eps) - ev(q1)
        d2 = ev(q2 + eps) - ev(q2)
        d3 = ev(q3 + eps) - ev(q3)
        beta = (d3 - d1) / (0.5 * widths)
        da = d2 - beta * 0.5 * widths
        db = d2 + beta * 0.5 * widths
        same = da * db >= 0
        out = np.where(
            same,
            0.5 * widths * (np.abs(da) + np.abs(db)),
            0.5 * widths * (da * da + db * db) / np.maximum(np.abs(da - db), 1e-300),
        )
        return float(np.sum(out))
    # smooth/sampled route: rectangle rule on the grid
    t = f.grid
    if f.descriptor is not None:
        d = f.descriptor.evaluate(t + eps) - f.samples
    else:
        d = f.evaluate(t + eps) - f.samples
    return float(np.mean(np.abs(d))) * TWO_PI


def integral_modulus(f: CircleFunction, delta: float, rel_tol: float = 1e-3) -> float:
    """sup over |eps| < delta of int |f(t+eps) - f(t)| dt.

    The sup is approximated from below on the shift ladder eps = j*delta/m,
    m = 32, 64, ... refined until the value stabilizes.
    """
    if delta <= 0:
        raise InvalidArgumentError("delta must be positive")
    if delta > math.pi:
        raise InvalidArgumentError("delta must be at most pi")
    cache: dict[float, float] = {}

    def value_at(m: int) -> float:
        best = 0.0
        for j in range(1, m + 1):
            eps = delta * j / m
            v = cache.get(eps)
            if v is None:
                v = _l1_shift_integral(f, eps)
                cache[eps] = v
            best = max(best, v)
        return best

    m = 32
    prev = value_at(m)
    while m < 256:
        m *= 2
        cur = value_at(m)
        if abs(cur - prev) <= rel_tol * max(cur, 1e-300):
            return cur
        prev = cur
    return prev


def integral_modulus_table(f: CircleFunction, deltas: Sequence[float], ladder: int = 32) -> np.ndarray:
    """integral_modulus on a shared shift set so the table is monotone."""
    deltas = np.asarray(sorted(deltas), dtype=float)
    if np.any(deltas <= 0) or deltas[-1] > math.pi:
        raise InvalidArgumentError("deltas must lie in (0, pi]")
    shifts = np.unique(np.concatenate([d * np.arange(1, ladder + 1) / ladder for d in deltas]))
    vals = np.array([_l1_shift_integral(f, s) for s in shifts])
    out = np.empty(len(deltas))
    run = 0.0
    i = 0
    for j, d in enumerate(deltas):
        while i < len(shifts) and shifts[i] <= d * (1 + 1e-15):
            run = max(run, vals[i])
            i += 1
        out[j] = run
    return out


# ---------------------------------------------------------------------------
# norms and seminorms
# ---------------------------------------------------------------------------


def a_eps_norm(spectrum: FourierSpectrum, eps: WeightSequence) -> float:
    """sum over k of |x^(k)| eps_|k|, with eps_0 := eps_1."""
    if len(eps) < spectrum.k_max:
        raise InvalidArgumentError("weight sequence shorter than the spectral window")
    ks = np.abs(spectrum.ks)
    w = np.array([eps.get(int(k)) for k in ks])
    return float(np.sum(np.abs(spectrum.coeffs) * w))


def ap_norm(spectrum: FourierSpectrum, p: float) -> float:
    """(sum |x^(k)|^p)^(1/p)."""
    if p <= 0:
        raise InvalidArgumentError("p must be positive")
    mags = np.abs(spectrum.coeffs)
    return float(np.sum(mags**p) ** (1.0 / p))


def sobolev_seminorm(spectrum: FourierSpectrum, lam: float) -> float:
    """(sum (|x^(k)| |k|^lam)^2)^(1/2); the constant term contributes zero."""
    if not (0 < lam <= 1):
        raise InvalidArgumentError("lambda must lie in (0, 1]")
    ks = np.abs(spectrum.ks).astype(float)
    mags = np.abs(spectrum.coeffs)
    nz = ks > 0
    return float(math.sqrt(np.sum((mags[nz] * ks[nz] ** lam) ** 2)))


@lru_cache(maxsize=None)
def _sinc2_cumulative(m: int) -> float:
    """I(m) = int_0^m (sin u / u)^2 du by per-period quadrature."""
    if m <= 0:
        return 0.0
    prev = _sinc2_cumulative(m - 1)
    val, _ = quad(lambda u: (math.sin(u) / u) ** 2 if u != 0 else 1.0, m - 1, m, limit=100)
    return prev + val


def sinc_squared_integral(m: float) -> float:
    """I(m) = int_0^m (sin u / u)^2 du (quadrature, cached at integers)."""
    if m < 0:
        raise InvalidArgumentError("m must be nonnegative")
    base = int(math.floor(m))
    out = _sinc2_cumulative(base)
    if m > base:
        extra, _ = quad(lambda u: (math.sin(u) / u) ** 2 if u != 0 else 1.0, base, m, limit=100)
        out += extra
    return out


@dataclass(frozen=True)
class SeminormResult:
    value: float
    error_bound: float
    method: str


def _spectral_seminorm_squared(f: CircleFunction) -> float:
    s = compute_spectrum(f, f.grid_size // 2)
    ks = np.abs(s.ks)
    mags = np.abs(s.coeffs)
    total = 0.0
    for k in range(1, s.k_max + 1):
        w = 8.0 * math.pi * k * sinc_squared_integral(k)
        total += w * (mags[s.k_max + k] ** 2 + mags[s.k_max - k] ** 2)
    return total


def _direct_inner_values(f: CircleFunction, deltas: np.ndarray) -> np.ndarray:
    """int_T |f(t+d) - f(t-d)|^2 dt for each d, by sampling evaluation."""
    desc = f.descriptor
    if isinstance(desc, TrigPolynomial):
        deg = max(desc.degree, 1)
        n_in = 1
        while n_in < 2 * (2 * deg + 2):
            n_in *= 2
        t = _as_grid(n_in)
        ks = np.arange(-deg, deg + 1)
        c = desc.spectrum(deg)
        # f(t +/- d) = sum_k c_k e^{ikt} e^{+/-ikd}; difference = 2i sin(kd)
        A = c[:, None] * np.exp(1j * np.outer(ks, t))  # (K, N)
        S = 2j * np.sin(np.outer(ks, deltas))  # (K, D)
        D = A.T @ S  # (N, D)
        return TWO_PI * np.mean(np.abs(D) ** 2, axis=0)
    n_in = f.grid_size
    t = _as_grid(n_in)
    out = np.empty(len(deltas))
    for i, d in enumerate(deltas):
        vp = f.evaluate(t + d)
        vm = f.evaluate(t - d)
        out[i] = TWO_PI * np.mean((vp - vm) ** 2)
    return out


def integral_seminorm(f: CircleFunction, method: str = "auto", rel_tol: float = 1e-8) -> SeminormResult:
    """The difference seminorm ||f|| with
    ||f||^2 = int_0^1 delta^-2 int_T |f(t+d) - f(t-d)|^2 dt d delta.

    ``direct`` integrates the double integral (log-spaced trapezoid with
    Richardson extrapolation in the outer variable); ``spectral`` uses the
    weighted coefficient sum.  For rough sampled data the spectral route
    is the primary one and the double integral serves as a cross-check.
    """
    if method not in ("auto", "direct", "spectral"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    if method == "auto":
        method = "direct" if f.descriptor is not None else "spectral"
    if method == "spectral":
        val2 = _spectral_seminorm_squared(f)
        return SeminormResult(math.sqrt(val2), 1e-9 * math.sqrt(max(val2, 1e-300)), "spectral")

    if f.descriptor is None:
        raise InvalidArgumentError("direct double integral needs a descriptor for off-grid evaluation")
    deg = 1
    levels = 12
    if isinstance(f.descriptor, TrigPolynomial):
        deg = max(1, f.descriptor.degree)
        levels = 14
    elif isinstance(f.descriptor, LacunaryCosine):
        deg = int(f.descriptor.freqs.max())
        levels = 14
    delta_min = min(2.0**-20, 2.0**-20 / deg)
    n_nodes = 2**levels
    u = np.linspace(math.log(delta_min), 0.0, n_nodes + 1)
    deltas = np.exp(u)
    inner = _direct_inner_values(f, deltas)
    h_vals = inner / deltas  # integrand (inner/delta^2) * delta in u = log delta
    # Romberg on nested trapezoid sums
    romberg = []
    for s in range(6, -1, -1):
        stride = 2**s
        ys = h_vals[::stride]
        hh = (u[-1] - u[0]) / (len(ys) - 1)
        romberg.append(_trapezoid(ys, dx=hh))
    est = romberg[-1]
    err = abs(romberg[-1] - romberg[-2])
    table = list(romberg)
    for order in range(1, len(table)):
        fac = 4.0**order
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        if len(table) >= 2:
            err = abs(table[-1] - table[-2])
        est = table[-1]
    if not np.isfinite(est):
        raise NumericFailureError("outer quadrature failed", residual=float(err))
    tail = inner[0] / deltas[0]  # G is constant on [0, delta_min] to high order
    total2 = est + tail
    tail_err = tail * (deg * deltas[0]) ** 2
    value = math.sqrt(max(total2, 0.0))
    bound = (err + tail_err) / max(2 * value, 1e-300)
    return SeminormResult(value, bound, "direct")


def difference_identity_check(f: CircleFunction, delta: float) -> tuple[float, float]:
    """Both sides of the symmetric-difference identity
    (1/2pi) int |f(t+d) - f(t-d)|^2 dt  vs  4 sum |x^(k)|^2 sin^2(k d)."""
    if delta <= 0:
        raise InvalidArgumentError("delta must be positive")
    t = f.grid
    if isinstance(f.descriptor, TrigPolynomial):
        vp = f.descriptor.shifted_grid_values(f.grid_size, delta)
        vm = f.descriptor.shifted_grid_values(f.grid_size, -delta)
    elif f.descriptor is not None:
        vp = f.descriptor.evaluate(t + delta)
        vm = f.descriptor.evaluate(t - delta)
    else:
        h = TWO_PI / f.grid_size
        s = delta / h
        if abs(s - round(s)) > 1e-9:
            raise InvalidArgumentError("sampled functions support only grid-multiple shifts")
        s = int(round(s))
        vp = np.roll(f.samples, -s)
        vm = np.roll(f.samples, s)
    lhs = float(np.mean((vp - vm) ** 2))
    s = compute_spectrum(f, f.grid_size // 2)
    rhs = float(4.0 * np.sum(np.abs(s.coeffs) ** 2 * np.sin(s.ks * delta) ** 2))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Stieltjes pairing
# ---------------------------------------------------------------------------


def stieltjes_integral(f: CircleFunction, y: CircleFunction) -> float:
    """int_T f dy for continuous piecewise-linear y (exact per segment:
    slope times the antiderivative increment of f)."""
    if not isinstance(y.descriptor, PiecewiseLinear):
        raise UnsupportedIntegratorError("integrator requires a piecewise-linear descriptor for y")
    tq, tv = y.descriptor.float_nodes
    b = np.concatenate([tq[1:], [tq[0] + TWO_PI]])
    vb = np.concatenate([tv[1:], [tv[0]]])
    w = b - tq
    keep = w > 0
    slopes = (vb[keep] - tv[keep]) / w[keep]
    if f.descriptor is not None:
        fa = f.descriptor.antiderivative(tq[keep])
        fb = f.descriptor.antiderivative(b[keep])
    else:
        fa = _sampled_antiderivative(f, tq[keep])
        fb = _sampled_antiderivative(f, b[keep])
    return float(np.sum(slopes * (fb - fa)))


def _sampled_antiderivative(f: CircleFunction, t: np.ndarray) -> np.ndarray:
    grid = f.grid
    h = TWO_PI / f.grid_size
    vals = np.concatenate([f.samples, [f.samples[0]]])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * h)])
    xp = np.concatenate([grid, [math.pi]])
    u = np.mod(t + math.pi, TWO_PI) - math.pi
    base = np.round((t - u) / TWO_PI) * cum[-1]
    return np.interp(u, xp, cum) + base


@dataclass(frozen=True)
class PairingReport:
    lhs: float
    seminorm_x: float
    seminorm_y: float
    rhs: float
    margin: float
    route: str
    passed: bool


def pairing_inequality_check(x: CircleFunction, y: CircleFunction, tol: float = 1e-9) -> PairingReport:
    """Check (1/2pi)|int x dy| <= ||x||_{W 1/2} ||y||_{W 1/2}.

    y may be piecewise linear (Stieltjes route) or carry a smooth
    descriptor with a derivative (then int x dy = int x y' dt, exact on
    the grid for trig data).
    """
    if isinstance(y.descriptor, PiecewiseLinear):
        lhs = abs(stieltjes_integral(x, y)) / TWO_PI
        route = "stieltjes"
    elif y.descriptor is not None and hasattr(y.descriptor, "derivative_values"):
        t = x.grid
        xv = x.evaluate(t)
        yp = y.descriptor.derivative_values(t)
        lhs = abs(float(np.mean(xv * yp)))
        route = "smooth"
    else:
        raise UnsupportedIntegratorError("y must be piecewise linear or smoothly differentiable")
    sx = sobolev_seminorm(compute_spectrum(x, x.grid_size // 2), 0.5)
    sy = sobolev_seminorm(compute_spectrum(y, y.grid_size // 2), 0.5)
    rhs = sx * sy
    margin = rhs - lhs
    return PairingReport(lhs, sx, sy, rhs, margin, route, lhs <= rhs + tol * max(1.0, rhs))


# ---------------------------------------------------------------------------
# decay profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayProfile:
    ks: np.ndarray
    raw: np.ndarray  # |x^(k)| * k
    tail_sup: np.ndarray  # sup_{j >= k} |x^(j)| j / weight(j)

    def as_columns(self) -> dict:
        return {
            "k": self.ks.tolist(),
            "coeff_times_k": self.raw.tolist(),
            "tail_sup_weighted": self.tail_sup.tolist(),
        }


def decay_profile(spectrum: FourierSpectrum, weight) -> DecayProfile:
    """Weighted decay table: raw |x^(k)| k and the running tail sup of
    |x^(j)| j / w_j for j >= k (two-sided max over the sign of j)."""
    K = spectrum.k_max
    ks = np.arange(1, K + 1)
    if callable(weight):
        w = np.array([float(weight(int(k))) for k in ks])
    elif isinstance(weight, WeightSequence):
        w = np.array([weight.get(int(k)) for k in ks])
    else:
        w = np.asarray(weight, dtype=float)
        if len(w) < K:
            raise InvalidArgumentError("weight array shorter than spectral window")
        w = w[:K]
    if np.any(w <= 0):
        raise InvalidArgumentError("weights must be positive")
    mags = spectrum.magnitudes()
    two_sided = np.maximum(mags[K + 1 :], mags[:K][::-1])
    raw = two_sided * ks
    ratio = raw / w
    tail = np.maximum.accumulate(ratio[::-1])[::-1]
    return DecayProfile(ks, raw, tail)
