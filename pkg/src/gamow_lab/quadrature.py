"""Fourier-type integrals of spectral amplitudes.

Conventions: the full-line transform is (1/2pi) * int g(w) exp(-i w t) dw, the
half-line transform is int_0^inf g(w) exp(-i w t) dw (no 1/2pi).  At t = 0 the
full-line value is the right limit t -> 0+, so a 1/w integrand jumps to its
t >= 0 branch there.

Numerical route: Gauss-Kronrod (7/15) panels, bisected adaptively, over a
core interval that holds every feature of the integrand; beyond the core the
oscillatory tail is cut into half-period panels whose partial sums are
extrapolated with Wynn's epsilon algorithm (or closed by an amplitude bound
once that bound is below tolerance).  Exact route: residue calculus for
rational integrands.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (NonDecayingIntegrandError, PreconditionError, RealPoleError,
                     ToleranceNotMetError)
from .spectral import Rational, RationalHardyFunction, as_rational

DEFAULT_TOL = 1e-8

# Kronrod 15-point nodes/weights with embedded 7-point Gauss weights (QUADPACK qk15).
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_X = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_WK = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_WGFULL = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _WGFULL[_i] = _w
    _WGFULL[14 - _i] = _w
_WGFULL[7] = _WG[3]

_EPS = np.finfo(float).eps
MAX_PANELS = 400_000
MAX_TAIL_PANELS = 6000


class QuadratureMethod(enum.Enum):
    ADAPTIVE_PANELS = "AdaptivePanels"
    RESIDUE_EXACT = "ResidueExact"
    TAIL_BOUNDED = "TailBounded"
    ROTATED_CONTOUR = "RotatedContour"


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    panels_used: int
    method: QuadratureMethod

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("error estimate must be non-negative")
        if self.abs_error_estimate == 0 and self.method is not QuadratureMethod.RESIDUE_EXACT:
            raise ValueError("only the residue route may claim zero error")


@dataclass(frozen=True)
class FourierIntegral:
    """A transform request: the non-oscillatory factor, time, support and phase sign.

    ``sign`` is -1 for the inverse transform exp(-i w t) over w (the only one
    evaluated here) and +1 for the forward exp(+i w t) over t.
    """

    integrand: Callable
    t: float
    support: object
    sign: int = -1

    def evaluate(self, tol: float = DEFAULT_TOL) -> QuadratureResult:
        from .spectral import SpectralSupport
        if self.sign != -1:
            raise PreconditionError("only the exp(-i w t) inverse transform is evaluated")
        if SpectralSupport.parse(self.support) is SpectralSupport.FULL_LINE:
            return fourier_fullline(self.integrand, self.t, tol)
        return fourier_halfline(self.integrand, self.t, tol)


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod on many intervals at once

def _gk(f, a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _X[None, :]
    fx = np.asarray(f(x), dtype=complex)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise PreconditionError(f"integrand is not finite at {bad}")
    k = h * (fx @ _WK)
    g = h * (fx @ _WGFULL)
    return k, np.abs(k - g), np.abs(h) * (np.abs(fx) @ _WK)


def _adaptive(f, edges: np.ndarray, tol: float, budget: int = MAX_PANELS, phase: float = 0.0):
    """Integrate over consecutive intervals of ``edges``.

    Returns (per-interval values, per-interval error estimates, panels used,
    converged flag).  Acceptance is local: an interval is done when its
    Kronrod-minus-Gauss difference is below its width share of ``tol`` (or
    below a round-off floor, which is then still counted as error).  ``phase``
    is |t| for integrands carrying exp(-i w t): evaluating that factor at
    large |w t| loses about eps*|w t| relative accuracy, which sets the floor.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1].copy(), edges[1:].copy()
    root = np.arange(a.size)
    values = np.zeros(a.size, dtype=complex)
    errors = np.zeros(a.size)
    total = float(edges[-1] - edges[0])
    used = 0
    converged = True
    while a.size:
        k, err, kabs = _gk(f, a, b)
        used += a.size
        width = b - a
        floor = 8 * _EPS * kabs * (1.0 + phase * np.maximum(np.abs(a), np.abs(b)))
        local = np.maximum(tol * width / total, floor)
        err = np.maximum(err, floor)
        tiny = width <= 64 * _EPS * np.maximum(np.abs(a), np.abs(b))
        done = (err <= local) | tiny
        if used + 2 * np.count_nonzero(~done) > budget:
            done[:] = True
            converged = False
        np.add.at(values, root[done], k[done])
        np.add.at(errors, root[done], err[done])
        keep = ~done
        mid = 0.5 * (a[keep] + b[keep])
        a = np.concatenate([a[keep], mid])
        b = np.concatenate([mid, b[keep]])
        root = np.concatenate([root[keep], root[keep]])
    return values, errors, used, converged


def _csum(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def wynn_epsilon(partial_sums: Sequence[complex]) -> complex:
    """Wynn's epsilon extrapolation of a sequence of partial sums."""
    s = [complex(v) for v in partial_sums]
    n = len(s)
    if n < 3:
        return s[-1]
    prev = [0j] * (n + 1)
    cur = s[:]
    best = s[-1]
    for j in range(1, n):
        nxt = []
        for k in range(len(cur) - 1):
            d = cur[k + 1] - cur[k]
            if d == 0:
                return cur[k + 1] if j % 2 == 1 else best
            nxt.append(prev[k + 1] + 1.0 / d)
        prev, cur = cur, nxt
        if j % 2 == 0 and cur:
            best = cur[-1]
        if len(cur) < 2:
            break
    return best


# ---------------------------------------------------------------------------
# integrand features

def _features(g, points) -> list[tuple[float, float]]:
    feats = []
    if isinstance(g, (Rational, RationalHardyFunction)):
        for beta, _ in as_rational(g).poles:
            feats.append((beta.real, abs(beta.imag)))
    for p in points or ():
        p = complex(p)
        feats.append((p.real, abs(p.imag)))
    if not feats:
        feats.append((0.0, 1.0))
    return feats


def _core_cutoff(feats, t: float) -> float:
    hp = math.pi / abs(t) if t else 0.0
    reach = max(abs(c) for c, _ in feats)
    width = max(w for _, w in feats)
    scale = max(width, hp)
    if scale == 0:
        scale = max(reach, 1.0) * 1e-3
    return reach + 20.0 * scale


def _core_edges(feats, lo: float, hi: float, t: float) -> np.ndarray:
    pts = [lo, hi]
    for c, w in feats:
        w = w if w > 0 else 1e-3 * max(abs(c), 1.0)
        pts.append(c)
        step = w
        while step < hi - lo:
            pts.extend([c - step, c + step])
            step *= 4.0
    if t:
        hp = math.pi / abs(t)
        pts.extend(np.arange(lo, hi, hp).tolist())
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), lo, hi))
    return pts


def _as_callable(g):
    if isinstance(g, RationalHardyFunction):
        return g.rational
    return g


def _check_decay(g, reach: float, strict: bool, both_sides: bool = True) -> complex:
    """Verify |g| falls at least like 1/|w| (faster if ``strict``); return lim w*g(w)."""
    r1 = 1e3 * max(reach, 1.0)
    r2 = 1e6 * max(reach, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        if both_sides:
            vals = np.asarray(g(np.array([r1, -r1, r2, -r2], dtype=float)), dtype=complex)
        else:
            vals = np.asarray(g(np.array([r1, r1, r2, r2], dtype=float)), dtype=complex)
    m1 = np.abs(vals[:2]) * r1
    m2 = np.abs(vals[2:]) * r2
    if np.any(~np.isfinite(m2)) or np.any(m2 > 2.0 * m1 + 1e-300):
        raise NonDecayingIntegrandError("integrand does not decay like 1/|w|")
    if strict and np.any(m2 > 0.5 * m1) and np.max(m2) > 1e-12:
        raise NonDecayingIntegrandError("half-line integral at t = 0 diverges for 1/w decay")
    return complex(0.5 * (r2 * vals[2] - r2 * vals[3])) if both_sides else complex(r2 * vals[2])


def _oscillatory_tail(g, t: float, start: float, direction: int, tol: float):
    """int of g(w) exp(-i w t) from ``start`` to +inf (direction +1) or -inf (-1)."""
    hp = math.pi / abs(t)

    def h(w):
        return np.asarray(g(w), dtype=complex) * np.exp(-1j * w * t)

    sums: list[complex] = []
    running = 0j
    panel_err = 0.0
    used = 0
    batch = 16
    k = 0
    extrapolated: list[complex] = []
    while k < MAX_TAIL_PANELS:
        idx = np.arange(k, k + batch + 1, dtype=float)
        if direction > 0:
            edges = start + hp * idx
        else:
            edges = (start - hp * idx)[::-1]
        vals, errs, n, ok = _adaptive(h, edges, tol * 1e-3, phase=abs(t))
        if direction < 0:
            vals, errs = vals[::-1], errs[::-1]
        used += n
        panel_err += float(np.sum(errs))
        for v in vals:
            running += v
            sums.append(running)
        k += batch
        edge = start + direction * hp * k
        bound = 4.0 * abs(complex(g(edge))) / abs(t)
        if bound < 0.1 * tol:
            return running, bound + panel_err, used, QuadratureMethod.TAIL_BOUNDED
        extrapolated.append(wynn_epsilon(sums[-40:]))
        if len(extrapolated) >= 3:
            e0, e1, e2 = extrapolated[-1], extrapolated[-2], extrapolated[-3]
            err = abs(e0 - e1) + abs(e0 - e2)
            if err < 0.5 * tol:
                return e0, err + panel_err + 8 * _EPS * abs(e0), used, QuadratureMethod.ADAPTIVE_PANELS
    e0 = extrapolated[-1]
    err = abs(e0 - extrapolated[-2]) + abs(e0 - extrapolated[-3])
    return e0, err + panel_err, used, QuadratureMethod.ADAPTIVE_PANELS


def _finish(value: complex, err: float, used: int, method, tol: float, what: str) -> QuadratureResult:
    err = max(float(err), _EPS * abs(value), 1e-300)
    if not err <= tol:
        raise ToleranceNotMetError(f"{what}: error estimate {err:.3e} exceeds tol {tol:.3e}",
                                   value=value, estimate=err)
    return QuadratureResult(complex(value), err, int(used), method)


# ---------------------------------------------------------------------------
# public transforms

def _fullline_at_zero(f, feats, reach, c_inf, a, itol, side) -> QuadratureResult:
    """Symmetric principal value at t = 0 plus the jump -i*side*c/2 of a 1/w tail."""
    edges = _core_edges(feats, -a, a, 0.0)
    vals, errs, used, ok = _adaptive(f, edges, 0.5 * itol)
    core = _csum(vals)

    def sym(u):
        w = a / u
        return (np.asarray(f(w), dtype=complex) + np.asarray(f(-w), dtype=complex)) * a / (u * u)

    # g(w) + g(-w) falls like 1/w^2; stop the map at w = a/u_min (round-off in
    # the cancelling 1/w parts grows beyond that) and add the 1/w^2 remainder.
    u_min = 1e-6
    far = a / u_min
    remainder = far * complex(f(far) + f(-far))
    tv, te, tu, tok = _adaptive(sym, np.geomspace(u_min, 1.0, 13), 0.25 * itol)
    # next term of w*g(w) on the symmetric average is O(1/R^2)
    c_err = abs(c_inf - _check_decay(f, 10 * reach, strict=False))
    value = (core + _csum(tv) + remainder) / (2 * math.pi) - 0.5j * side * c_inf
    err = (float(np.sum(errs)) + float(np.sum(te)) + u_min * abs(remainder)) / (2 * math.pi) + 0.5 * c_err
    return QuadratureResult(complex(value), max(err, 1e-300), used + tu,
                            QuadratureMethod.ADAPTIVE_PANELS)


def fourier_fullline(g, t: float, tol: float = DEFAULT_TOL,
                     points: Sequence[complex] | None = None) -> QuadratureResult:
    """(1/2pi) int_{-inf}^{inf} g(w) exp(-i w t) dw by adaptive panels.

    ``g`` must be vectorized.  ``points`` lists complex locations of the
    integrand's features (pole positions); rational inputs supply their own.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    t = float(t)
    feats = _features(g, points)
    f = _as_callable(g)
    reach = max(abs(c) for c, _ in feats)
    c_inf = _check_decay(f, reach, strict=False)
    itol = 2 * math.pi * tol
    width = max(w for _, w in feats)
    if abs(t) * (reach + width + 1.0) < 1e-10:
        # t = 0, or |t| far below every scale of g: the value is the one-sided
        # limit at 0, off by O(|t| * scale) which is added to the error
        side = 1.0 if t >= 0 else -1.0
        r = _fullline_at_zero(f, feats, reach, c_inf, _core_cutoff(feats, 0.0), itol, side)
        err = r.abs_error_estimate + abs(t) * (reach + width + 1.0) * (abs(c_inf) + abs(r.value))
        return _finish(r.value, err, r.panels_used, r.method, tol, "fourier_fullline")
    a = _core_cutoff(feats, t)
    edges = _core_edges(feats, -a, a, t)

    def h(w):
        return np.asarray(f(w), dtype=complex) * np.exp(-1j * w * t)

    vals, errs, used, ok = _adaptive(h, edges, 0.5 * itol, phase=abs(t))
    core = _csum(vals)
    right = _oscillatory_tail(f, t, a, +1, 0.25 * itol)
    left = _oscillatory_tail(f, t, -a, -1, 0.25 * itol)
    value = (core + right[0] + left[0]) / (2 * math.pi)
    err = (float(np.sum(errs)) + right[1] + left[1]) / (2 * math.pi)
    method = (QuadratureMethod.TAIL_BOUNDED
              if right[3] is left[3] is QuadratureMethod.TAIL_BOUNDED
              else QuadratureMethod.ADAPTIVE_PANELS)
    return _finish(value, err, used + right[2] + left[2], method, tol, "fourier_fullline")


def fourier_halfline(g, t: float, tol: float = DEFAULT_TOL,
                     points: Sequence[complex] | None = None) -> QuadratureResult:
    """int_0^inf g(w) exp(-i w t) dw by adaptive panels; w = 0 is a panel edge."""
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    t = float(t)
    feats = _features(g, points)
    f = _as_callable(g)
    reach = max(abs(c) for c, _ in feats)
    _check_decay(f, reach, strict=(t == 0.0), both_sides=False)
    a = _core_cutoff(feats, t)
    edges = _core_edges(feats, 0.0, a, t)
    if t == 0.0:
        vals, errs, used, ok = _adaptive(f, edges, 0.5 * tol)

        def mapped(u):
            w = a / u
            return np.asarray(f(w), dtype=complex) * a / (u * u)

        tv, te, tu, tok = _adaptive(mapped, np.linspace(0.0, 1.0, 9), 0.5 * tol)
        value = _csum(vals) + _csum(tv)
        err = float(np.sum(errs)) + float(np.sum(te))
        return _finish(value, err, used + tu, QuadratureMethod.ADAPTIVE_PANELS, tol, "fourier_halfline")

    def h(w):
        return np.asarray(f(w), dtype=complex) * np.exp(-1j * w * t)

    vals, errs, used, ok = _adaptive(h, edges, 0.5 * tol, phase=abs(t))
    tail = _oscillatory_tail(f, t, a, +1, 0.5 * tol)
    value = _csum(vals) + tail[0]
    err = float(np.sum(errs)) + tail[1]
    return _finish(value, err, used + tail[2], tail[3], tol, "fourier_halfline")


def estimated_panels(g, t: float, points: Sequence[complex] | None = None) -> int:
    """Rough count of half-period core panels a half-line transform at ``t`` needs."""
    if t == 0:
        return 1
    a = _core_cutoff(_features(g, points), float(t))
    return int(a * abs(t) / math.pi) + 1


def _check_poles(r: Rational):
    for beta, _ in r.poles:
        if beta.imag == 0:
            raise RealPoleError(f"pole {beta} lies on the real axis")
    if r.decay_order < 1:
        raise NonDecayingIntegrandError("rational integrand does not vanish at infinity")


def _exp_series(beta: complex, t: float, m: int) -> np.ndarray:
    """Taylor coefficients of exp(-i w t) about w = beta."""
    base = np.exp(-1j * beta * t)
    return np.array([base * (-1j * t) ** k / math.factorial(k) for k in range(m)], dtype=complex)


def residue_fourier(g, t: float) -> QuadratureResult:
    """(1/2pi) int g(w) exp(-i w t) dw for rational ``g`` by closing the contour.

    t >= 0 closes clockwise through the lower half-plane, t < 0 counter-clockwise
    through the upper one.
    """
    r = as_rational(g)
    _check_poles(r)
    t = float(t)
    lower = t >= 0
    total = 0j
    for beta, m in r.poles:
        if (beta.imag < 0) == lower:
            total += r.residue(beta, _exp_series(beta, t, m))
    value = -1j * total if lower else 1j * total
    return QuadratureResult(complex(value), 0.0, 0, QuadratureMethod.RESIDUE_EXACT)


def halfline_rotated(g, t: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """int_0^inf g(w) exp(-i w t) dw for rational ``g`` by rotating onto the imaginary axis.

    For t > 0 the path turns to the ray w = -i y, picking up the poles of the
    fourth quadrant; for t < 0 it turns to w = +i y and the first quadrant.
    What remains is a Laplace integral with an exp(-|t| y) weight.
    """
    r = as_rational(g)
    _check_poles(r)
    t = float(t)
    if t == 0.0:
        return fourier_halfline(r, t, tol)
    down = t > 0
    ray = -1j if down else 1j
    total = 0j
    for beta, m in r.poles:
        on_ray = beta.real == 0 and ((beta.imag < 0) == down)
        if on_ray:
            raise PreconditionError(f"pole {beta} lies on the rotated integration ray")
        if beta.real > 0 and ((beta.imag < 0) == down):
            total += r.residue(beta, _exp_series(beta, t, m))
    poles_part = (-2j * math.pi * total) if down else (2j * math.pi * total)
    scale = 1.0 / abs(t)
    at = abs(t)

    def fu(u):
        y = scale * u / (1.0 - u)
        with np.errstate(over="ignore", under="ignore"):
            return r(ray * y) * np.exp(-at * y) * ray * scale / (1.0 - u) ** 2

    near = [abs(beta) * at / (1.0 + abs(beta) * at) for beta, _ in r.poles]
    edges = np.unique(np.concatenate([np.linspace(0.0, 1.0, 17), np.clip(near, 0.0, 1.0)]))
    vals, errs, used, ok = _adaptive(fu, edges, 0.5 * tol)
    value = poles_part + _csum(vals)
    err = float(np.sum(errs)) + 16 * _EPS * abs(poles_part)
    return _finish(value, err, used, QuadratureMethod.ROTATED_CONTOUR, tol, "halfline_rotated")


@dataclass(frozen=True)
class CrossValidation:
    quadrature: QuadratureResult
    residue: QuadratureResult
    difference: complex
    agree: bool


def cross_validate(g, t: float, tol: float = DEFAULT_TOL) -> CrossValidation:
    """Run the panel and residue routes on the same rational integrand and compare them."""
    r = as_rational(g)
    quad = fourier_fullline(r, t, tol)
    res = residue_fourier(r, t)
    diff = quad.value - res.value
    agree = abs(diff) <= tol + quad.abs_error_estimate
    return CrossValidation(quad, res, diff, bool(agree))
