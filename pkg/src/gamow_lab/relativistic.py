"""Relativistic Gamow states: boosts, Wigner rotations, D^j and forward-cone gating.

Metric (+,-,-,-), c = 1.  Four-vectors are numpy arrays (t, x, y, z).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonTimelikeError, PreconditionError, RotationCheckError

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
E0 = np.array([1.0, 0.0, 0.0, 0.0])
ATOL = 1e-12


@dataclass(frozen=True)
class FourVector:
    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        if len(x) != 3:
            raise PreconditionError("spatial part must have 3 components")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)

    @classmethod
    def from_array(cls, a) -> "FourVector":
        a = np.asarray(a, dtype=float)
        return cls(a[0], tuple(a[1:4]))

    def array(self) -> np.ndarray:
        return np.array([self.t, *self.x])

    def interval(self) -> float:
        return self.t * self.t - sum(v * v for v in self.x)

    def __add__(self, other: "FourVector") -> "FourVector":
        return FourVector.from_array(self.array() + other.array())


def in_forward_cone(v) -> bool:
    if not isinstance(v, FourVector):
        v = FourVector.from_array(v)
    return v.t >= 0 and v.t * v.t >= sum(c * c for c in v.x)


@dataclass(frozen=True)
class LorentzTransform:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise PreconditionError("Lorentz matrix must be 4x4")
        scale = max(1.0, float(np.abs(m).max()) ** 2)
        if not np.allclose(m.T @ ETA @ m, ETA, rtol=0, atol=ATOL * scale):
            raise PreconditionError("matrix does not preserve the metric")
        if m[0, 0] < 1 - ATOL:
            raise PreconditionError("transformation is not orthochronous")
        if np.linalg.det(m) < 0:
            raise PreconditionError("transformation is not proper")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, LorentzTransform):
            return LorentzTransform(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other, dtype=float)

    def inverse(self) -> "LorentzTransform":
        # Lambda^-1 = eta Lambda^T eta
        return LorentzTransform(ETA @ self.matrix.T @ ETA)

    @property
    def spatial(self) -> np.ndarray:
        return self.matrix[1:, 1:]

    @classmethod
    def identity(cls) -> "LorentzTransform":
        return cls(np.eye(4))


def _check_velocity(p_hat) -> np.ndarray:
    p = np.asarray(p_hat, dtype=float)
    if p.shape != (4,):
        raise PreconditionError("4-velocity must have 4 components")
    if p[0] <= 0 or abs(p[0] ** 2 - p[1:] @ p[1:] - 1) > ATOL * max(1.0, p[0] ** 2):
        raise NonTimelikeError(f"{p} is not a future unit timelike vector")
    return p


def four_velocity(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v @ v >= 1:
        raise NonTimelikeError("|v| must be below 1")
    g = 1.0 / math.sqrt(1.0 - v @ v)
    return np.concatenate([[g], g * v])


def standard_boost(p_hat) -> LorentzTransform:
    """Rotation-free boost L(p) with L(p) e0 = p."""
    p = _check_velocity(p_hat)
    g, u = p[0], p[1:]
    m = np.empty((4, 4))
    m[0, 0] = g
    m[0, 1:] = u
    m[1:, 0] = u
    m[1:, 1:] = np.eye(3) + np.outer(u, u) / (1.0 + g)
    return LorentzTransform(m)


def boost(v) -> LorentzTransform:
    return standard_boost(four_velocity(v))


def rotation(axis, angle: float) -> LorentzTransform:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    r = np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * k @ k
    m = np.eye(4)
    m[1:, 1:] = r
    return LorentzTransform(m)


def wigner_rotation(lam: LorentzTransform, p_hat) -> LorentzTransform:
    """W = L^-1(Lambda p) Lambda L(p), checked to be a spatial rotation."""
    p = _check_velocity(p_hat)
    lp = lam @ p
    lp = lp / math.sqrt(lp[0] ** 2 - lp[1:] @ lp[1:])
    w = standard_boost(lp).inverse().matrix @ lam.matrix @ standard_boost(p).matrix
    tol = 1e-9 * max(1.0, float(np.abs(lam.matrix).max()) ** 2)
    if np.abs(w @ E0 - E0).max() > tol or np.abs(w[0, 1:]).max() > tol:
        raise RotationCheckError("Wigner rotation does not fix the time axis")
    # remove round-off in the boost row/column before handing out the rotation
    w[0, :] = E0
    w[:, 0] = E0
    u, _, vt = np.linalg.svd(w[1:, 1:])
    w[1:, 1:] = u @ vt
    return LorentzTransform(w)


def _spin(j) -> Fraction:
    j2 = Fraction(j).limit_denominator(2) * 2
    if j2 < 0 or j2.denominator != 1 or abs(Fraction(j) * 2 - j2) > Fraction(1, 10**9):
        raise PreconditionError(f"spin {j} is not a non-negative half-integer")
    return j2 / 2


def euler_zyz(r: np.ndarray) -> tuple[float, float, float]:
    """(alpha, beta, gamma) with R = Rz(alpha) Ry(beta) Rz(gamma)."""
    c = min(1.0, max(-1.0, r[2, 2]))
    s = math.hypot(r[0, 2], r[1, 2])
    beta = math.atan2(s, c)
    if s < 1e-12:
        # gimbal lock: alpha absorbs gamma
        if c > 0:
            return math.atan2(r[1, 0], r[0, 0]), 0.0, 0.0
        return math.atan2(-r[1, 0], -r[0, 0]), math.pi, 0.0
    return math.atan2(r[1, 2], r[0, 2]), beta, math.atan2(r[2, 1], -r[2, 0])


def small_d(j, beta: float) -> np.ndarray:
    """Wigner d^j(beta), rows/columns ordered m = j, j-1, ..., -j."""
    j = _spin(j)
    n = int(2 * j + 1)
    ms = [j - k for k in range(n)]
    cb, sb = math.cos(beta / 2), math.sin(beta / 2)
    d = np.zeros((n, n))
    fact = lambda q: math.factorial(int(q))
    for a, mp in enumerate(ms):
        for b, m in enumerate(ms):
            pre = math.sqrt(fact(j + mp) * fact(j - mp) * fact(j + m) * fact(j - m))
            total = 0.0
            for k in range(int(max(0, m - mp)), int(min(j + m, j - mp)) + 1):
                den = fact(j + m - k) * fact(k) * fact(mp - m + k) * fact(j - mp - k)
                total += ((-1) ** int(mp - m + k) * cb ** int(2 * j + m - mp - 2 * k)
                          * sb ** int(mp - m + 2 * k) / den)
            d[a, b] = pre * total
    return d


def wigner_d(j, rot) -> np.ndarray:
    """D^j for a rotation given as a LorentzTransform or a 3x3 matrix (z-y-z, Condon-Shortley)."""
    if isinstance(rot, LorentzTransform):
        m = rot.matrix
        if np.abs(m @ E0 - E0).max() > 1e-9:
            raise RotationCheckError("transformation is not a pure rotation")
        r = m[1:, 1:]
    else:
        r = np.asarray(rot, dtype=float)
    j = _spin(j)
    alpha, beta, gamma = euler_zyz(r)
    ms = np.array([float(j - k) for k in range(int(2 * j + 1))])
    return (np.exp(-1j * ms * alpha)[:, None] * small_d(j, beta)
            * np.exp(-1j * ms * gamma)[None, :])


@dataclass(frozen=True)
class GamowLabel:
    j: float
    s_r: complex
    p_hat: tuple[float, float, float, float]
    j3: float

    def __post_init__(self):
        j = _spin(self.j)
        j3 = Fraction(self.j3).limit_denominator(2)
        if abs(j3) > j or (j - j3).denominator != 1:
            raise PreconditionError(f"j3={self.j3} not in -j..j for j={self.j}")
        _check_velocity(self.p_hat)
        if self.sqrt_s_r.imag > 0 or self.sqrt_s_r.real <= 0:
            raise PreconditionError("sqrt(s_R) must be M - i Gamma/2 with M > 0, Gamma >= 0")
        object.__setattr__(self, "p_hat", tuple(float(v) for v in self.p_hat))
        object.__setattr__(self, "s_r", complex(self.s_r))

    @classmethod
    def from_mass_width(cls, j, mass: float, width: float, p_hat=(1, 0, 0, 0), j3=None):
        return cls(j, complex(mass, -width / 2) ** 2, p_hat, j if j3 is None else j3)

    @property
    def sqrt_s_r(self) -> complex:
        # principal root has Re > 0; its sign of Im follows Im s_R, so Im <= 0 when Gamma >= 0
        return cmath.sqrt(complex(self.s_r))

    @property
    def mass(self) -> float:
        return self.sqrt_s_r.real

    @property
    def width(self) -> float:
        return -2 * self.sqrt_s_r.imag

    @property
    def index(self) -> int:
        return int(round(self.j - self.j3))


@dataclass(frozen=True)
class TransformedState:
    phase: complex
    components: np.ndarray
    new_p_hat: np.ndarray


@dataclass(frozen=True)
class CausalityRejection:
    x: FourVector
    reason: str = "outside forward cone"

    def __bool__(self):
        return False


def transform_gamow(label: GamowLabel, lam: LorentzTransform, x):
    """Act with (Lambda, x) on the Gamow ket |j, s_R, p, j3>.

    Translations outside the forward cone return CausalityRejection: the
    transformations form only a semigroup there.
    """
    if not isinstance(x, FourVector):
        x = FourVector.from_array(x)
    if not in_forward_cone(x):
        return CausalityRejection(x)
    p = np.array(label.p_hat)
    gamma, v = p[0], p[1:] / p[0]
    phase = cmath.exp(-1j * gamma * label.sqrt_s_r * (x.t - np.dot(x.x, v)))
    w = wigner_rotation(lam.inverse(), p)
    comps = wigner_d(label.j, w)[:, label.index]
    new_p = lam.inverse() @ p
    return TransformedState(phase, comps, new_p)


def random_rotation(rng: np.random.Generator) -> LorentzTransform:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    r = np.array([[a*a + b*b - c*c - d*d, 2*(b*c - a*d), 2*(b*d + a*c)],
                  [2*(b*c + a*d), a*a - b*b + c*c - d*d, 2*(c*d - a*b)],
                  [2*(b*d - a*c), 2*(c*d + a*b), a*a - b*b - c*c + d*d]])
    m = np.eye(4)
    m[1:, 1:] = r
    return LorentzTransform(m)


def random_forward(rng: np.random.Generator, scale: float = 1.0) -> FourVector:
    """Uniform t in [0, scale) and a spatial point uniform in the ball of radius t."""
    t = rng.uniform(0, scale)
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    return FourVector(t, tuple(n * t * rng.uniform(0, 1) ** (1 / 3)))
