"""Resonance lines, Breit-Wigner amplitudes/densities and rational Hardy test functions.

Internal units use hbar = 1, so a width ``gamma`` is also the decay rate and
``1/gamma`` is the lifetime in inverse-energy units.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import PoleEvaluationError, PreconditionError, SeriesDomainError


class SpectralSupport(enum.Enum):
    HALF_LINE = "half"
    FULL_LINE = "full"

    @classmethod
    def parse(cls, value) -> "SpectralSupport":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {"half": cls.HALF_LINE, "halfline": cls.HALF_LINE,
                   "truncated": cls.HALF_LINE,
                   "full": cls.FULL_LINE, "fullline": cls.FULL_LINE,
                   "extended": cls.FULL_LINE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown spectral support {value!r}") from None


class HalfPlane(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class ResonanceLine:
    """Resonance position ``e_r`` and width ``gamma`` (both > 0)."""

    e_r: float
    gamma: float

    def __post_init__(self):
        if not (self.e_r > 0 and math.isfinite(self.e_r)):
            raise PreconditionError(f"e_r must be positive and finite, got {self.e_r}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise PreconditionError(f"gamma must be positive and finite, got {self.gamma}")

    @property
    def z_r(self) -> complex:
        return complex(self.e_r, -self.gamma / 2)

    @property
    def tau(self) -> float:
        return 1.0 / self.gamma


# ---------------------------------------------------------------------------
# rational functions

def _trim(coef: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    coef = np.asarray(coef, dtype=complex)
    if coef.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(coef))
    if scale == 0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(coef) > rtol * scale)[0]
    return coef[: keep[-1] + 1].copy()


def _merge_poles(poles: Iterable[tuple[complex, int]]) -> tuple[tuple[complex, int], ...]:
    merged: dict[complex, int] = {}
    for beta, m in poles:
        beta = complex(beta)
        m = int(m)
        if m < 1:
            raise PreconditionError(f"pole order must be >= 1, got {m}")
        merged[beta] = merged.get(beta, 0) + m
    return tuple(merged.items())


def _taylor_shift(coef: np.ndarray, beta: complex, n: int) -> np.ndarray:
    """First ``n`` Taylor coefficients of the polynomial about ``beta``."""
    out = np.zeros(n, dtype=complex)
    deg = len(coef) - 1
    for k in range(min(n, deg + 1)):
        s = 0j
        for j in range(k, deg + 1):
            s += coef[j] * math.comb(j, k) * beta ** (j - k)
        out[k] = s
    return out


def _inverse_power_series(a: complex, m: int, n: int) -> np.ndarray:
    """Taylor coefficients of (a + h)^(-m) in h, first ``n`` terms."""
    k = np.arange(n)
    return np.array([(-1) ** int(i) * math.comb(m + int(i) - 1, int(i)) * a ** (-m - int(i))
                     for i in k], dtype=complex)


def _series_mul(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    return np.convolve(x, y)[:n]


class Rational:
    """Rational function N(w) / prod_k (w - beta_k)^m_k with complex coefficients.

    The numerator is stored in ascending-power order.  Instances are immutable
    by convention and evaluate element-wise on numpy arrays.
    """

    def __init__(self, numerator: Sequence[complex], poles: Iterable[tuple[complex, int]] = ()):
        self.numerator = _trim(numerator)
        self.poles = _merge_poles(poles)

    # -- construction -------------------------------------------------------
    @classmethod
    def from_partial_fractions(cls, terms: Iterable[tuple[complex, Sequence[complex]]],
                               polynomial: Sequence[complex] = (0,)) -> "Rational":
        """Build sum_k sum_j c_kj / (w - beta_k)^j (+ polynomial)."""
        terms = [(complex(b), [complex(c) for c in cs]) for b, cs in terms]
        poles = [(b, len(cs)) for b, cs in terms if len(cs) > 0]
        num = P.polymul(np.asarray(polynomial, dtype=complex), _denominator(poles))
        for k, (beta, cs) in enumerate(terms):
            m = len(cs)
            others = _denominator(p for i, p in enumerate(poles) if i != k)
            for j, c in enumerate(cs, start=1):
                if c == 0:
                    continue
                factor = P.polypow([-beta, 1], m - j) if m > j else np.ones(1)
                num = P.polyadd(num, c * P.polymul(others, factor))
        return cls(num, poles)

    @classmethod
    def constant(cls, value: complex) -> "Rational":
        return cls([value])

    # -- algebra --------------------------------------------------------------
    @property
    def denominator(self) -> np.ndarray:
        return _denominator(self.poles)

    @property
    def decay_order(self) -> int:
        """deg(denominator) - deg(numerator); >= 1 means the function vanishes at infinity."""
        if np.all(self.numerator == 0):
            return 10 ** 9
        return sum(m for _, m in self.poles) - (len(self.numerator) - 1)

    def __call__(self, w):
        w_arr = np.asarray(w, dtype=complex)
        den = np.ones_like(w_arr)
        for beta, m in self.poles:
            d = w_arr - beta
            if np.any(d == 0):
                raise PoleEvaluationError(f"evaluation at pole {beta}")
            den = den * d ** m
        val = P.polyval(w_arr, self.numerator) / den
        if np.ndim(w) == 0:
            return complex(val)
        return val

    def __mul__(self, other):
        if isinstance(other, Rational):
            return Rational(P.polymul(self.numerator, other.numerator),
                            self.poles + other.poles)
        if isinstance(other, RationalHardyFunction):
            return self * other.rational
        return Rational(self.numerator * complex(other), self.poles)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Rational):
            other = other.rational if isinstance(other, RationalHardyFunction) else Rational.constant(other)
        mine = dict(self.poles)
        theirs = dict(other.poles)
        common = {b: max(mine.get(b, 0), theirs.get(b, 0)) for b in {**mine, **theirs}}

        def lift(num, own):
            extra = [(b, m - own.get(b, 0)) for b, m in common.items() if m > own.get(b, 0)]
            return P.polymul(num, _denominator(extra))

        num = P.polyadd(lift(self.numerator, mine), lift(other.numerator, theirs))
        return Rational(num, common.items())

    __radd__ = __add__

    def __neg__(self):
        return Rational(-self.numerator, self.poles)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Rational) else -1 * other)

    def times_omega(self) -> "Rational":
        return Rational(P.polymul(self.numerator, [0, 1]), self.poles)

    # -- analysis -------------------------------------------------------------
    def laurent_principal(self, beta: complex, extra: np.ndarray | None = None) -> np.ndarray:
        """Principal-part coefficients [c_1, ..., c_m] of self(w) * extra(w - beta) at ``beta``.

        ``extra`` holds Taylor coefficients of an analytic factor about ``beta``;
        ``c_j`` multiplies ``(w - beta)^(-j)``.
        """
        poles = dict(self.poles)
        m = poles[complex(beta)]
        series = _taylor_shift(self.numerator, beta, m)
        for other, mo in self.poles:
            if other == beta:
                continue
            series = _series_mul(series, _inverse_power_series(beta - other, mo, m), m)
        if extra is not None:
            series = _series_mul(series, np.asarray(extra, dtype=complex)[:m], m)
        series = np.pad(series, (0, m - len(series)))
        # coefficient of h^s in (w-beta)^m f  <->  c_{m-s}
        return series[::-1].copy()

    def residue(self, beta: complex, extra: np.ndarray | None = None) -> complex:
        return complex(self.laurent_principal(beta, extra)[0])

    def partial_fractions(self) -> tuple[list[tuple[complex, np.ndarray]], np.ndarray]:
        """Return ([(beta, [c_1..c_m])...], polynomial part in ascending order)."""
        quotient, _ = P.polydiv(self.numerator, self.denominator) \
            if len(self.numerator) >= len(self.denominator) else (np.zeros(1), None)
        terms = [(beta, self.laurent_principal(beta)) for beta, _ in self.poles]
        return terms, _trim(quotient)

    def is_analytic_in(self, half_plane: HalfPlane) -> bool:
        if half_plane is HalfPlane.LOWER:
            return all(b.imag > 0 for b, _ in self.poles)
        return all(b.imag < 0 for b, _ in self.poles)

    def __repr__(self):
        return f"Rational(numerator={self.numerator.tolist()}, poles={list(self.poles)})"


def _denominator(poles) -> np.ndarray:
    den = np.ones(1, dtype=complex)
    for beta, m in poles:
        den = P.polymul(den, P.polypow([-complex(beta), 1], int(m)))
    return den


@dataclass(frozen=True)
class RationalHardyFunction:
    """Partial-fraction test function sum_k sum_j c_kj / (w - beta_k)^j.

    ``half_plane`` names where the function is analytic: LOWER (the usual
    observable wave function) requires every pole in the upper half-plane.
    """

    poles: tuple[tuple[complex, int], ...]
    coefficients: tuple[tuple[complex, ...], ...]
    half_plane: HalfPlane = HalfPlane.LOWER

    def __post_init__(self):
        poles = tuple((complex(b), int(m)) for b, m in self.poles)
        coefs = tuple(tuple(complex(c) for c in cs) for cs in self.coefficients)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "half_plane", HalfPlane(self.half_plane))
        if len(poles) != len(coefs):
            raise PreconditionError("one coefficient list per pole is required")
        if len({b for b, _ in poles}) != len(poles):
            raise PreconditionError("poles must be distinct")
        for (beta, m), cs in zip(poles, coefs):
            if m < 1 or len(cs) != m:
                raise PreconditionError(f"pole {beta}: order {m} needs {m} coefficients")
            if cs[-1] == 0:
                raise PreconditionError(f"pole {beta}: leading coefficient vanishes")
            if self.half_plane is HalfPlane.LOWER and not beta.imag > 0:
                raise PreconditionError(f"pole {beta} must lie in the upper half-plane")
            if self.half_plane is HalfPlane.UPPER and not beta.imag < 0:
                raise PreconditionError(f"pole {beta} must lie in the lower half-plane")
        if sum(m for _, m in poles) < 2:
            raise PreconditionError("total pole order must be at least 2")

    @classmethod
    def power(cls, pole: complex, order: int = 2, coefficient: complex = 1.0) -> "RationalHardyFunction":
        """``coefficient / (w - pole)^order``; the half-plane follows from the pole."""
        pole = complex(pole)
        half = HalfPlane.LOWER if pole.imag > 0 else HalfPlane.UPPER
        cs = [0.0] * (order - 1) + [coefficient]
        return cls(((pole, order),), (tuple(cs),), half)

    @cached_property
    def rational(self) -> Rational:
        return Rational.from_partial_fractions(zip((b for b, _ in self.poles), self.coefficients))

    def __call__(self, w):
        return self.rational(w)

    def times_omega(self) -> Rational:
        return self.rational.times_omega()

    @property
    def decay_order(self) -> int:
        return self.rational.decay_order


def as_rational(g) -> Rational:
    if isinstance(g, Rational):
        return g
    if isinstance(g, RationalHardyFunction):
        return g.rational
    raise TypeError(f"expected a rational function, got {type(g).__name__}")


# ---------------------------------------------------------------------------
# amplitudes and densities

def bw_amplitude(line: ResonanceLine, omega, normalized: bool = True):
    """Breit-Wigner amplitude i/(w - z_R), times sqrt(gamma/2pi) when normalized."""
    w = np.asarray(omega, dtype=complex)
    d = w - line.z_r
    if np.any(d == 0):
        raise PoleEvaluationError("Breit-Wigner amplitude evaluated at its pole")
    amp = 1j / d
    if normalized:
        amp = amp * math.sqrt(line.gamma / (2 * math.pi))
    return complex(amp) if np.ndim(omega) == 0 else amp


def bw_amplitude_rational(line: ResonanceLine, normalized: bool = True) -> Rational:
    scale = math.sqrt(line.gamma / (2 * math.pi)) if normalized else 1.0
    return Rational([1j * scale], [(line.z_r, 1)])


def bw_density(line: ResonanceLine, e, support=SpectralSupport.FULL_LINE):
    """Normalized Lorentzian (gamma/2pi)/((E-E_R)^2 + (gamma/2)^2); zero below 0 on the half line."""
    support = SpectralSupport.parse(support)
    e_arr = np.asarray(e, dtype=float)
    half = line.gamma / 2
    rho = (line.gamma / (2 * math.pi)) / ((e_arr - line.e_r) ** 2 + half * half)
    if support is SpectralSupport.HALF_LINE:
        rho = np.where(e_arr < 0, 0.0, rho)
    return float(rho) if np.ndim(e) == 0 else rho


def bw_density_rational(line: ResonanceLine) -> Rational:
    z = line.z_r
    return Rational([line.gamma / (2 * math.pi)], [(z, 1), (z.conjugate(), 1)])


def norm_truncated_closed_form(line: ResonanceLine) -> float:
    return 0.5 + math.atan(2 * line.e_r / line.gamma) / math.pi


def norm_truncated_series(line: ResonanceLine, order: int) -> float:
    """Partial sum 1 - (1/pi) sum_{k<=order} (-1)^k x^(2k+1)/(2k+1), x = gamma/(2 E_R)."""
    if int(order) != order or order < 0:
        raise SeriesDomainError(f"order must be a non-negative integer, got {order}")
    x = line.gamma / (2 * line.e_r)
    if x >= 1:
        raise SeriesDomainError(f"series diverges for gamma/(2 E_R) = {x:g} >= 1")
    s = math.fsum((-1) ** k * x ** (2 * k + 1) / (2 * k + 1) for k in range(int(order) + 1))
    return 1.0 - s / math.pi


def norm_full_line(line: ResonanceLine) -> float:
    return 1.0


@dataclass(frozen=True)
class EnergyDensity:
    line: ResonanceLine
    support: SpectralSupport
    normalization: float

    @classmethod
    def of(cls, line: ResonanceLine, support) -> "EnergyDensity":
        support = SpectralSupport.parse(support)
        norm = (norm_truncated_closed_form(line) if support is SpectralSupport.HALF_LINE
                else norm_full_line(line))
        return cls(line, support, norm)

    def __post_init__(self):
        if self.support is SpectralSupport.FULL_LINE and self.normalization != 1.0:
            raise PreconditionError("full-line Lorentzian has unit norm")
        if self.support is SpectralSupport.HALF_LINE and not 0 < self.normalization < 1:
            raise PreconditionError("half-line norm must lie in (0, 1)")

    def __call__(self, e):
        return bw_density(self.line, e, self.support)

    def pdf(self, e):
        """Density renormalized to unit mass on its support."""
        return bw_density(self.line, e, self.support) / self.normalization


# ---------------------------------------------------------------------------
# Hardy test functions

def hardy_eval(f, omega):
    return f(omega)


@dataclass(frozen=True)
class SemicircleReport:
    radii: np.ndarray
    bounds: np.ndarray
    decaying: bool

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(np.log(self.bounds)) / np.diff(np.log(self.radii))


def verify_semicircle_decay(f, radii: Sequence[float], half_plane: HalfPlane | None = None,
                            n_angles: int = 4097) -> SemicircleReport:
    """max |f| * R on the semicircle of radius R inside the analytic half-plane.

    ``decaying`` requires the bound to shrink monotonically with a log-log
    slope below -1/2 between consecutive radii.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise PreconditionError("radii must be positive and strictly increasing")
    if half_plane is None:
        half_plane = getattr(f, "half_plane", HalfPlane.LOWER)
    half_plane = HalfPlane(half_plane)
    theta = np.linspace(0.0, math.pi, n_angles)
    if half_plane is HalfPlane.LOWER:
        theta = -theta
    bounds = np.array([np.max(np.abs(np.asarray(f(r * np.exp(1j * theta)))) * r)
                       for r in radii])
    decaying = bool(radii.size > 1 and np.all(np.diff(bounds) < 0)
                    and np.all(np.diff(np.log(bounds)) / np.diff(np.log(radii)) < -0.5))
    return SemicircleReport(radii, bounds, decaying)
