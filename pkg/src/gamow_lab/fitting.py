"""Synthetic lineshape/decay data and the fits that recover Gamma and Gamma_R."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, least_squares

from .errors import NonConvergenceError, NoPeakError, PreconditionError
from .spectral import ResonanceLine
from .units import HBAR


@dataclass(frozen=True)
class LineshapeSample:
    energies: np.ndarray
    cross_sections: np.ndarray
    noise_sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        s = np.asarray(self.cross_sections, dtype=float)
        if e.ndim != 1 or e.shape != s.shape:
            raise PreconditionError("energies and cross sections must be 1-d and equally long")
        if np.any(s < 0):
            raise PreconditionError("cross sections must be non-negative")
        if self.noise_sigma < 0:
            raise PreconditionError("noise_sigma must be non-negative")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "cross_sections", s)


@dataclass(frozen=True)
class DecayCounts:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_initial: int

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
            raise PreconditionError("bin edges must be increasing and non-negative")
        if counts.shape != (edges.size - 1,):
            raise PreconditionError("need exactly one count per bin")
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise PreconditionError("counts must be non-negative integers")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts.astype(np.int64))


@dataclass(frozen=True)
class LineshapeFit:
    scale: float
    e_r: float
    gamma: float
    scale_err: float
    e_r_err: float
    gamma_err: float
    iterations: int


@dataclass(frozen=True)
class RateFit:
    gamma_r: float
    gamma_r_err: float
    rate: float
    rate_err: float


@dataclass(frozen=True)
class WidthLifetimeReport:
    gamma_fit: float
    gamma_r_fit: float
    tau_fit: float
    ratio: float
    uncertainties: dict

    def agrees(self, rel: float) -> bool:
        return abs(self.ratio - 1.0) <= rel


def lorentzian(e, scale, e_r, gamma):
    e = np.asarray(e, dtype=float)
    return scale / ((e - e_r) ** 2 + 0.25 * gamma * gamma)


def generate_lineshape(line: ResonanceLine, e_grid, amplitude_scale: float = 1.0,
                       noise_sigma: float = 0.0, seed: int | None = 0) -> LineshapeSample:
    """Lorentzian cross section on ``e_grid`` plus seeded Gaussian noise, clipped at 0."""
    if noise_sigma < 0:
        raise PreconditionError("noise_sigma must be non-negative")
    e = np.asarray(e_grid, dtype=float)
    sigma = lorentzian(e, amplitude_scale, line.e_r, line.gamma)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        sigma = np.clip(sigma + rng.normal(0.0, noise_sigma, e.shape), 0.0, None)
    return LineshapeSample(e, sigma, float(noise_sigma), seed)


def _initial_guess(e, s):
    i = int(np.argmax(s))
    if i == 0 or i == len(s) - 1 or s[i] <= 0:
        raise NoPeakError("maximum sits on the window edge; peak not inside the energy grid")
    half = 0.5 * s[i]
    left = np.nonzero(s[:i] < half)[0]
    right = np.nonzero(s[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise NoPeakError("half-maximum not reached on both sides of the peak")
    # linear interpolation of the half-maximum crossings
    j = left[-1]
    e_lo = e[j] + (half - s[j]) * (e[j + 1] - e[j]) / (s[j + 1] - s[j])
    k = i + right[0]
    e_hi = e[k - 1] + (half - s[k - 1]) * (e[k] - e[k - 1]) / (s[k] - s[k - 1])
    gamma = max(e_hi - e_lo, np.min(np.diff(e)))
    return s[i] * 0.25 * gamma * gamma, e[i], gamma


def fit_lineshape(sample: LineshapeSample, max_iter: int = 200) -> LineshapeFit:
    """Nonlinear least squares for (scale, E_R, Gamma)."""
    e, s = sample.energies, sample.cross_sections
    if e.size < 5:
        raise PreconditionError("need at least 5 sample points")
    order = np.argsort(e)
    e, s = e[order], s[order]
    a0, e0, g0 = _initial_guess(e, s)
    peak = a0 / (0.25 * g0 * g0)

    # work in units of the initial width and peak height
    x = (e - e0) / g0
    y = s / peak

    def resid(p):
        a, c, w = p
        return a / ((x - c) ** 2 + 0.25 * w * w) - y

    def jac(p):
        a, c, w = p
        d = (x - c) ** 2 + 0.25 * w * w
        return np.column_stack([1 / d, 2 * a * (x - c) / d ** 2, -0.5 * a * w / d ** 2])

    sol = least_squares(resid, [0.25, 0.0, 1.0], jac=jac, method="lm", xtol=1e-10,
                        ftol=1e-15, gtol=1e-15, max_nfev=max_iter * 4)
    if not sol.success:
        raise NonConvergenceError(f"lineshape fit did not converge: {sol.message}")
    a, c, w = sol.x
    w = abs(w)
    dof = max(x.size - 3, 1)
    s2 = 2 * sol.cost / dof
    J = sol.jac
    try:
        cov = np.linalg.inv(J.T @ J) * s2
        se = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        se = np.full(3, np.nan)
    return LineshapeFit(scale=a * peak * g0 * g0, e_r=e0 + c * g0, gamma=w * g0,
                        scale_err=se[0] * peak * g0 * g0, e_r_err=se[1] * g0,
                        gamma_err=se[2] * g0, iterations=int(sol.nfev))


def generate_decay_counts(line: ResonanceLine, bin_edges, n_initial: int, seed: int | None = 0,
                          poisson: bool = True, hbar: float = 1.0) -> DecayCounts:
    """Binned exponential decay counts with rate Gamma_R / hbar."""
    edges = np.asarray(bin_edges, dtype=float)
    if np.any(edges < 0):
        raise PreconditionError("bin edges must be non-negative")
    rate = line.gamma / hbar
    expected = n_initial * (np.exp(-rate * edges[:-1]) - np.exp(-rate * edges[1:]))
    if poisson:
        counts = np.random.default_rng(seed).poisson(expected)
    else:
        counts = np.round(expected)
    return DecayCounts(edges, counts, int(n_initial))


def _bin_probs(lam, lo, hi):
    # p_i proportional to exp(-lam lo) - exp(-lam hi), normalized over the observed range
    w = np.exp(-lam * (lo - lo[0])) * -np.expm1(-lam * (hi - lo))
    return w / w.sum()


def _score(lam, lo, hi, n):
    """d/dlam of the multinomial log-likelihood."""
    width = hi - lo
    # d/dlam log(exp(-lam lo)(1 - exp(-lam w))) = -lo + w/(exp(lam w) - 1)
    d = -(lo - lo[0]) + width / np.expm1(lam * width)
    p = _bin_probs(lam, lo, hi)
    return float(np.sum(n * d) - n.sum() * np.sum(p * d))


def _loglinear_rate(lo, hi, n):
    mask = n > 0
    mid = 0.5 * (lo + hi)[mask]
    y = np.log(n[mask] / (hi - lo)[mask])
    coef = np.polyfit(mid, y, 1, w=np.sqrt(n[mask]))
    return -coef[0]


def fit_decay_rate(counts: DecayCounts, hbar: float = 1.0) -> RateFit:
    """Binned maximum likelihood for a single exponential.

    Only the shape of the histogram enters (multinomial likelihood), so the
    result is unchanged by rescaling all counts.  The rate is returned both in
    time units and as Gamma_R = hbar * rate.
    """
    n = counts.counts.astype(float)
    lo, hi = counts.bin_edges[:-1], counts.bin_edges[1:]
    if np.count_nonzero(n) < 3:
        raise PreconditionError("need at least 3 non-empty bins")
    guess = _loglinear_rate(lo, hi, n)
    span = hi[-1] - lo[0]
    if not np.isfinite(guess) or guess <= 0:
        guess = 1.0 / span
    f = lambda lam: _score(lam, lo, hi, n)
    a, b = guess / 2, guess * 2
    for _ in range(200):
        if f(a) > 0:
            break
        a /= 2
    for _ in range(200):
        if f(b) < 0:
            break
        b *= 2
    if not (f(a) > 0 > f(b)):
        raise NonConvergenceError("could not bracket the likelihood maximum")
    lam = brentq(f, a, b, xtol=1e-16 * b, rtol=4 * np.finfo(float).eps, maxiter=500)
    h = 1e-6 * lam
    info = -(f(lam + h) - f(lam - h)) / (2 * h)
    err = 1.0 / math.sqrt(info) if info > 0 else float("nan")
    return RateFit(gamma_r=hbar * lam, gamma_r_err=hbar * err, rate=lam, rate_err=err)


def compare_width_lifetime(gamma_fit: float, gamma_r_fit: float, gamma_err: float = 0.0,
                           gamma_r_err: float = 0.0, hbar: float = HBAR) -> WidthLifetimeReport:
    """tau = hbar/Gamma_R and the ratio Gamma/Gamma_R with propagated errors."""
    if not (gamma_fit > 0 and gamma_r_fit > 0):
        raise PreconditionError("widths must be positive")
    tau = hbar / gamma_r_fit
    ratio = gamma_fit / gamma_r_fit
    rel = math.hypot(gamma_err / gamma_fit, gamma_r_err / gamma_r_fit)
    unc = {"gamma_fit": gamma_err, "gamma_r_fit": gamma_r_err,
           "tau_fit": tau * gamma_r_err / gamma_r_fit, "ratio": ratio * rel}
    return WidthLifetimeReport(gamma_fit, gamma_r_fit, tau, ratio, unc)


def save_lineshape(sample: LineshapeSample, path) -> None:
    np.savetxt(path, np.column_stack([sample.energies, sample.cross_sections]),
               delimiter=",", header="E,sigma", comments="# ", fmt="%.17g")


def load_lineshape(path) -> LineshapeSample:
    data = np.loadtxt(Path(path), delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise PreconditionError("lineshape file needs columns E, sigma")
    return LineshapeSample(data[:, 0], data[:, 1])


def save_counts(counts: DecayCounts, path) -> None:
    edges = counts.bin_edges
    np.savetxt(path, np.column_stack([edges[:-1], edges[1:], counts.counts]), delimiter=",",
               header=f"t_lo,t_hi,count (N={counts.n_initial})", comments="# ", fmt="%.17g")


def load_counts(path, n_initial: int | None = None) -> DecayCounts:
    data = np.loadtxt(Path(path), delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 3:
        raise PreconditionError("counts file needs columns t_lo, t_hi, count")
    lo, hi, c = data.T
    if np.any(lo[1:] != hi[:-1]):
        raise PreconditionError("bins must be contiguous")
    edges = np.append(lo, hi[-1])
    n = int(c.sum()) if n_initial is None else int(n_initial)
    return DecayCounts(edges, c, n)
