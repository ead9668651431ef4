"""Time-dependent quantities: Gamow amplitudes, survival, precursors, tails.

Two different objects are kept apart here:

* the Gamow amplitude (i/2pi) int psi(w) exp(-i w t) / (w - z_R) dw, which
  pairs the first-power Breit-Wigner amplitude with a test function, and
* the survival amplitude int rho(E) exp(-i E t) dE of the second-power
  (density) Lorentzian.

On the full line both come from residue calculus.  On the half line they are
computed numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (DegeneratePoleError, NoCrossoverError, PreconditionError,
                     ToleranceNotMetError, WindowTooEarlyError)
from .quadrature import (QuadratureMethod, QuadratureResult, estimated_panels,
                         fourier_fullline, fourier_halfline, halfline_rotated,
                         residue_fourier)
from .spectral import (HalfPlane, Rational, RationalHardyFunction, ResonanceLine,
                       SpectralSupport, as_rational, bw_density, bw_density_rational,
                       norm_truncated_closed_form)

DEFAULT_TOL = 1e-10
PANEL_BUDGET = 50_000


@dataclass(frozen=True)
class AmplitudeSeries:
    times: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    model: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        errors = np.asarray(self.errors, dtype=float)
        if not (times.shape == values.shape == errors.shape) or times.ndim != 1:
            raise PreconditionError("times, values and errors must be 1-d and equally long")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise PreconditionError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "errors", errors)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def _halfline(g: Rational, t: float, tol: float) -> QuadratureResult:
    """Half-line transform: panel quadrature when affordable, rotated contour otherwise."""
    if estimated_panels(g, t) <= PANEL_BUDGET:
        try:
            return fourier_halfline(g, t, tol)
        except ToleranceNotMetError:
            pass
    return halfline_rotated(g, t, tol)


def _check_psi(psi) -> Rational:
    r = as_rational(psi)
    if not r.is_analytic_in(HalfPlane.LOWER):
        raise PreconditionError("test function must be analytic in the lower half-plane")
    return r


def _gamow_integrand(line: ResonanceLine, psi) -> Rational:
    return _check_psi(psi) * Rational([1j], [(line.z_r, 1)])


def gamow_amplitude_result(line: ResonanceLine, psi, t: float, support=SpectralSupport.FULL_LINE,
                           tol: float = DEFAULT_TOL, method: str = "residue") -> QuadratureResult:
    """Gamow amplitude with its error estimate; see :func:`gamow_amplitude`."""
    support = SpectralSupport.parse(support)
    t = float(t)
    g = _gamow_integrand(line, psi)
    if support is SpectralSupport.HALF_LINE:
        r = _halfline(g, t, 2 * math.pi * tol)
        return QuadratureResult(r.value / (2 * math.pi), r.abs_error_estimate / (2 * math.pi),
                                r.panels_used, r.method)
    if method == "residue":
        if t < 0:
            return QuadratureResult(0j, 0.0, 0, QuadratureMethod.RESIDUE_EXACT)
        return residue_fourier(g, t)
    if method == "quadrature":
        if t < 0:
            # psi(w) exp(-i w t) leaves the lower Hardy class for t < 0, so the
            # psi-weighted integral is outside the semigroup; evolve the Gamow
            # ket itself and pair it with psi at the pole.
            kernel = fourier_fullline(Rational([1j], [(line.z_r, 1)]), t, tol)
            scale = abs(psi(line.z_r))
            return QuadratureResult(kernel.value * psi(line.z_r),
                                    kernel.abs_error_estimate * max(scale, 1e-300),
                                    kernel.panels_used, kernel.method)
        return fourier_fullline(g, t, tol)
    raise PreconditionError(f"unknown method {method!r}")


def gamow_amplitude(line: ResonanceLine, psi, t: float, support=SpectralSupport.FULL_LINE,
                    tol: float = DEFAULT_TOL, method: str = "residue") -> complex:
    """(i/2pi) int_support psi(w) exp(-i w t) / (w - z_R) dw.

    On the full line this is theta(t) exp(-i z_R t) psi(z_R): the time
    evolution exists only as a semigroup, so t < 0 gives exactly 0.  ``method``
    picks residue calculus or panel quadrature for the full line; the half
    line is always numerical.
    """
    return gamow_amplitude_result(line, psi, t, support, tol, method).value


def survival_amplitude(line: ResonanceLine, support, t: float,
                       tol: float = DEFAULT_TOL) -> QuadratureResult:
    """int_support rho(E) exp(-i E t) dE with rho normalized on the support."""
    support = SpectralSupport.parse(support)
    t = float(t)
    rho = bw_density_rational(line)
    if support is SpectralSupport.FULL_LINE:
        r = residue_fourier(rho, t)
        return QuadratureResult(2 * math.pi * r.value, 0.0, 0, r.method)
    norm = norm_truncated_closed_form(line)
    return _halfline(rho * (1.0 / norm), t, tol)


def survival_probability(line: ResonanceLine, support, t: float, tol: float = DEFAULT_TOL) -> float:
    return abs(survival_amplitude(line, support, t, tol).value) ** 2


@dataclass(frozen=True)
class PrecursorReport:
    series: AmplitudeSeries
    max_probability: float
    t_at_max: float
    quantity: str


def precursor_report(line: ResonanceLine, psi, support, t_grid: Sequence[float],
                     tol: float = DEFAULT_TOL, quantity: str = "amplitude") -> PrecursorReport:
    """Tabulate detection probabilities at negative times.

    ``quantity`` is "amplitude" (the Gamow amplitude with test function psi)
    or "density" (the survival amplitude of the Lorentzian density).
    """
    support = SpectralSupport.parse(support)
    times = np.asarray(t_grid, dtype=float)
    if times.size == 0 or np.any(times >= 0):
        raise PreconditionError("precursor grid must hold negative times only")
    times = np.sort(times)
    vals, errs = [], []
    for t in times:
        if quantity == "amplitude":
            r = gamow_amplitude_result(line, psi, t, support, tol)
        elif quantity == "density":
            r = survival_amplitude(line, support, t, tol)
        else:
            raise PreconditionError(f"unknown quantity {quantity!r}")
        vals.append(r.value)
        errs.append(r.abs_error_estimate)
    series = AmplitudeSeries(times, np.array(vals), np.array(errs),
                             {"line": line, "support": support.value, "quantity": quantity})
    probs = series.probabilities
    i = int(np.argmax(probs))
    return PrecursorReport(series, float(probs[i]), float(times[i]), quantity)


def tail_exponent(line: ResonanceLine, t_window: tuple[float, float] | None = None,
                  n_points: int = 40, support=SpectralSupport.HALF_LINE,
                  tol: float = 1e-13) -> float:
    """Log-log slope of the half-line survival probability over ``t_window``."""
    support = SpectralSupport.parse(support)
    if support is SpectralSupport.FULL_LINE:
        raise PreconditionError("full-line survival is exactly exponential; no power-law tail")
    if t_window is None:
        t_window = (50 * line.tau, 500 * line.tau)
    t_min, t_max = map(float, t_window)
    if not 0 < t_min < t_max or n_points < 3:
        raise PreconditionError("need 0 < t_min < t_max and at least 3 points")
    if t_min < 20 * line.tau:
        raise WindowTooEarlyError(f"t_min must be at least 20 lifetimes, got {t_min / line.tau:g}")
    ts = np.geomspace(t_min, t_max, int(n_points))
    probs = np.array([survival_probability(line, support, t, tol) for t in ts])
    norm = norm_truncated_closed_form(line)
    if math.exp(-line.gamma * t_min) / norm ** 2 > 1e-3 * probs[0]:
        raise WindowTooEarlyError("exponential branch still dominates at t_min")
    x, y = np.log(ts), np.log(probs)
    curvature = np.polyfit(x, y, 2)[0]
    if abs(curvature) * (x[-1] - x[0]) > 0.5:
        raise WindowTooEarlyError("survival curve is not a power law over the window")
    return float(np.polyfit(x, y, 1)[0])


def _tail_constant(line: ResonanceLine) -> float:
    return (bw_density(line, 0.0) / norm_truncated_closed_form(line)) ** 2


def crossover_time(line: ResonanceLine, support=SpectralSupport.HALF_LINE) -> float:
    """Time t* where exp(-gamma t) equals the power-law branch C/t^2."""
    if SpectralSupport.parse(support) is SpectralSupport.FULL_LINE:
        raise PreconditionError("full-line survival has no power-law branch")
    c = _tail_constant(line)
    g = line.gamma

    def log_ratio(t):
        return -g * t - math.log(c) + 2.0 * math.log(t)

    lo = 2.0 / g
    if log_ratio(lo) <= 0:
        raise NoCrossoverError("power-law branch dominates at every time")
    hi = 4.0 * lo
    while log_ratio(hi) > 0:
        hi *= 2.0
        if hi > 1e8 / g:
            raise NoCrossoverError("no crossover found below 1e8 lifetimes")
    return float(brentq(log_ratio, lo, hi, xtol=1e-14 * hi, rtol=1e-14))


def branch_ratio(line: ResonanceLine, t: float) -> float:
    """exp(-gamma t) / (C / t^2)."""
    return math.exp(-line.gamma * t) * t * t / _tail_constant(line)


@dataclass(frozen=True)
class PoleBackgroundSplit:
    pole_terms: tuple[tuple[complex, complex], ...]
    background: Rational

    def __post_init__(self):
        for z, _ in self.pole_terms:
            if not z.imag < 0:
                raise PreconditionError(f"resonance pole {z} must lie in the lower half-plane")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        total = self.background(w)
        for z, c in self.pole_terms:
            total = total + c / (w - z)
        return total

    def pole_rational(self) -> Rational:
        return Rational.from_partial_fractions([(z, [c]) for z, c in self.pole_terms])


def pole_background_split(phi) -> PoleBackgroundSplit:
    """Split a rational phi into simple lower-half-plane pole terms plus a background.

    The background keeps every other pole (those of the upper half-plane) and
    has no polynomial part.
    """
    r = as_rational(phi)
    terms, poly = r.partial_fractions()
    if np.any(poly != 0):
        raise PreconditionError("phi must vanish at infinity (no polynomial part)")
    poles, rest = [], []
    for beta, coefs in terms:
        if beta.imag < 0:
            if len(coefs) > 1 and np.any(coefs[1:] != 0):
                raise DegeneratePoleError(f"resonance pole {beta} is not simple")
            poles.append((beta, complex(coefs[0])))
        else:
            rest.append((beta, coefs))
    background = Rational.from_partial_fractions(rest) if rest else Rational.constant(0)
    return PoleBackgroundSplit(tuple(poles), background)


def fermi_retarded_probability(line: ResonanceLine, psi, support, r: float, c: float, t: float,
                               tol: float = DEFAULT_TOL) -> float:
    """|Gamow amplitude at the retarded time t - r/c|^2 (schematic two-atom picture)."""
    if r < 0:
        raise PreconditionError("distance must be non-negative")
    if not c > 0:
        raise PreconditionError("signal speed must be positive")
    return abs(gamow_amplitude(line, psi, t - r / c, support, tol)) ** 2
