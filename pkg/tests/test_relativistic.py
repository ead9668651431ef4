import cmath
import math

import numpy as np
import pytest

from gamow_lab.dynamics import gamow_amplitude
from gamow_lab.errors import NonTimelikeError, PreconditionError, RotationCheckError
from gamow_lab.relativistic import (ETA, CausalityRejection, FourVector, GamowLabel,
                                    LorentzTransform, TransformedState, boost, euler_zyz,
                                    four_velocity, in_forward_cone, random_forward,
                                    random_rotation, rotation, standard_boost, transform_gamow,
                                    wigner_d, wigner_rotation)
from gamow_lab.spectral import RationalHardyFunction, ResonanceLine


def test_forward_cone():
    assert in_forward_cone(FourVector(1.0))
    assert not in_forward_cone(FourVector(-1.0))
    assert not in_forward_cone(FourVector(1.0, (2, 0, 0)))
    assert in_forward_cone(FourVector(1.0, (1, 0, 0)))
    assert in_forward_cone(FourVector(0.0))
    assert FourVector(2.0, (1, 1, 1)).interval() == 1.0


def test_lorentz_transform_checks():
    with pytest.raises(PreconditionError):
        LorentzTransform(np.diag([1.0, 2.0, 1.0, 1.0]))
    with pytest.raises(PreconditionError):
        LorentzTransform(np.diag([-1.0, 1.0, 1.0, 1.0]))   # not orthochronous
    with pytest.raises(PreconditionError):
        LorentzTransform(np.diag([1.0, -1.0, 1.0, 1.0]))   # parity


def test_standard_boost_rest_is_identity():
    np.testing.assert_array_equal(standard_boost([1, 0, 0, 0]).matrix, np.eye(4))


def test_standard_boost_x():
    v = 0.6
    L = standard_boost(four_velocity([v, 0, 0])).matrix
    eta = math.atanh(v)
    want = np.eye(4)
    want[0, 0] = want[1, 1] = math.cosh(eta)
    want[0, 1] = want[1, 0] = math.sinh(eta)
    np.testing.assert_allclose(L, want, atol=1e-15)


def test_standard_boost_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        v = rng.normal(size=3)
        v *= rng.uniform(0, 0.99) / np.linalg.norm(v)
        p = four_velocity(v)
        L = standard_boost(p).matrix
        np.testing.assert_allclose(L @ [1, 0, 0, 0], p, atol=1e-12)
        np.testing.assert_allclose(L.T @ ETA @ L, ETA, atol=1e-12 * L[0, 0] ** 2)
        np.testing.assert_allclose(L, L.T)


def test_standard_boost_rejects_non_timelike():
    with pytest.raises(NonTimelikeError):
        standard_boost([1.0, 1.0, 0, 0])
    with pytest.raises(NonTimelikeError):
        four_velocity([1.0, 0, 0])


def test_wigner_collinear_is_identity():
    p = four_velocity([0.4, 0, 0])
    w = wigner_rotation(boost([0.7, 0, 0]), p)
    np.testing.assert_allclose(w.matrix, np.eye(4), atol=1e-12)


def test_wigner_rotation_at_rest_returns_rotation():
    R = rotation([1, 2, 3], 0.8)
    w = wigner_rotation(R, [1, 0, 0, 0])
    np.testing.assert_allclose(w.matrix, R.matrix, atol=1e-13)


def test_wigner_non_collinear():
    w = wigner_rotation(boost([0, 0.6, 0]), four_velocity([0.5, 0, 0])).matrix
    r = w[1:, 1:]
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(r), 1.0, atol=1e-12)
    angle = math.acos((np.trace(r) - 1) / 2)
    assert angle > 0.05
    # rotation axis is perpendicular to both boosts
    axis = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    np.testing.assert_allclose(axis[:2], 0, atol=1e-12)


def test_wigner_d_small_cases():
    np.testing.assert_array_equal(wigner_d(0, rotation([1, 1, 0], 1.1)), [[1]])
    np.testing.assert_allclose(wigner_d(0.5, LorentzTransform.identity()), np.eye(2), atol=1e-15)
    th = 0.9
    d = wigner_d(0.5, rotation([0, 1, 0], th))
    want = [[math.cos(th / 2), -math.sin(th / 2)], [math.sin(th / 2), math.cos(th / 2)]]
    np.testing.assert_allclose(d, want, atol=1e-15)


def test_wigner_d_z_rotation_phases():
    a = 0.7
    d = wigner_d(1.5, rotation([0, 0, 1], a))
    np.testing.assert_allclose(np.diag(d), np.exp(-1j * a * np.array([1.5, 0.5, -0.5, -1.5])),
                               atol=1e-14)


def test_wigner_d_one_is_vector_rep():
    # D^1 = U R U^dagger with U mapping Cartesian to spherical components
    s = 1 / math.sqrt(2)
    U = np.array([[-s, 1j * s, 0], [0, 0, 1], [s, 1j * s, 0]])
    rng = np.random.default_rng(8)
    for _ in range(20):
        R = random_rotation(rng)
        np.testing.assert_allclose(wigner_d(1, R), U @ R.spatial @ U.conj().T, atol=1e-12)


def test_euler_gimbal_cases():
    for angle in (0.0, 0.3, -2.0):
        a, b, g = euler_zyz(rotation([0, 0, 1], angle).spatial)
        assert b == 0 and g == 0
        np.testing.assert_allclose(cmath.exp(1j * a), cmath.exp(1j * angle))
    R = rotation([0, 1, 0], math.pi).matrix @ rotation([0, 0, 1], 0.4).matrix
    a, b, g = euler_zyz(R[1:, 1:])
    assert b == math.pi
    d = wigner_d(1, LorentzTransform(R))
    np.testing.assert_allclose(d @ d.conj().T, np.eye(3), atol=1e-14)


@pytest.mark.parametrize("j", [0, 0.5, 1, 1.5])
def test_wigner_d_unitary(j):
    rng = np.random.default_rng(int(2 * j))
    for _ in range(100):
        d = wigner_d(j, random_rotation(rng))
        np.testing.assert_allclose(d @ d.conj().T, np.eye(int(2 * j + 1)), atol=1e-12)


@pytest.mark.parametrize("j", [0, 1])
def test_wigner_d_representation_integer(j):
    rng = np.random.default_rng(21)
    for _ in range(100):
        r1, r2 = random_rotation(rng), random_rotation(rng)
        np.testing.assert_allclose(wigner_d(j, r1 @ r2), wigner_d(j, r1) @ wigner_d(j, r2),
                                   atol=1e-10)


@pytest.mark.parametrize("j", [0.5, 1.5])
def test_wigner_d_half_integer_is_projective(j):
    # SO(3) matrices fix D^j only up to the sign of the SU(2) lift
    rng = np.random.default_rng(22)
    signs = set()
    for _ in range(100):
        r1, r2 = random_rotation(rng), random_rotation(rng)
        lhs, rhs = wigner_d(j, r1 @ r2), wigner_d(j, r1) @ wigner_d(j, r2)
        if np.allclose(lhs, rhs, atol=1e-10):
            signs.add(1)
        else:
            np.testing.assert_allclose(lhs, -rhs, atol=1e-10)
            signs.add(-1)
    assert signs == {1, -1}


def test_half_integer_sign_counterexample():
    rz = rotation([0, 0, 1], math.pi)
    d = wigner_d(0.5, rz)
    np.testing.assert_allclose(d @ d, -np.eye(2), atol=1e-15)
    np.testing.assert_allclose(wigner_d(0.5, rz @ rz), np.eye(2), atol=1e-15)


def test_wigner_d_rejects_boost():
    with pytest.raises(RotationCheckError):
        wigner_d(1, boost([0.3, 0, 0]))
    with pytest.raises(PreconditionError):
        wigner_d(0.7, LorentzTransform.identity())


def test_gamow_label_validation():
    GamowLabel.from_mass_width(1, 2.0, 0.1, j3=-1)
    with pytest.raises(PreconditionError):
        GamowLabel.from_mass_width(1, 2.0, 0.1, j3=0.5)
    with pytest.raises(PreconditionError):
        GamowLabel.from_mass_width(0.5, 2.0, -0.1)
    with pytest.raises(NonTimelikeError):
        GamowLabel(0.5, 4.0, (1.0, 0.5, 0.0, 0.0), 0.5)
    lab = GamowLabel.from_mass_width(0.5, 2.0, 0.3)
    assert lab.sqrt_s_r.imag <= 0
    np.testing.assert_allclose([lab.mass, lab.width], [2.0, 0.3], rtol=1e-14)


def test_transform_rest_frame():
    lab = GamowLabel.from_mass_width(1, 1.5, 0.2, j3=0)
    t = 4.0
    out = transform_gamow(lab, LorentzTransform.identity(), FourVector(t))
    assert isinstance(out, TransformedState)
    np.testing.assert_allclose(out.phase, cmath.exp(-1.5j * t) * math.exp(-0.1 * t), rtol=1e-14)
    np.testing.assert_allclose(out.components, [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(out.new_p_hat, [1, 0, 0, 0])


def test_transform_rejections():
    lab = GamowLabel.from_mass_width(0.5, 1.0, 0.1)
    out = transform_gamow(lab, LorentzTransform.identity(), FourVector(-10.0))
    assert isinstance(out, CausalityRejection)
    assert not out
    out = transform_gamow(lab, LorentzTransform.identity(), FourVector(1.0, (2, 0, 0)))
    assert isinstance(out, CausalityRejection)


def test_unitary_limit():
    rng = np.random.default_rng(6)
    lab = GamowLabel.from_mass_width(0.5, 1.0, 0.0, p_hat=four_velocity([0.3, -0.2, 0.1]))
    for _ in range(50):
        out = transform_gamow(lab, random_rotation(rng) @ boost([0.1, 0.2, 0.0]),
                              random_forward(rng, 10))
        np.testing.assert_allclose(abs(out.phase), 1.0, atol=1e-13)


def test_moving_label_phase_bounded_and_p_real():
    rng = np.random.default_rng(7)
    lab = GamowLabel.from_mass_width(1.5, 2.0, 0.3, p_hat=four_velocity([0.5, 0.1, -0.3]), j3=0.5)
    for _ in range(200):
        lam = random_rotation(rng) @ boost(rng.uniform(-0.4, 0.4, size=3))
        out = transform_gamow(lab, lam, random_forward(rng, 20))
        assert abs(out.phase) <= 1 + 1e-14
        p = out.new_p_hat
        assert np.isrealobj(p)
        np.testing.assert_allclose(p[0] ** 2 - p[1:] @ p[1:], 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(out.components), 1.0, atol=1e-12)


def test_transform_components_use_inverse_wigner_rotation():
    lab = GamowLabel.from_mass_width(0.5, 1.0, 0.1, p_hat=four_velocity([0.5, 0, 0]))
    lam = boost([0, 0.6, 0])
    out = transform_gamow(lab, lam, FourVector(1.0))
    w = wigner_rotation(lam.inverse(), lab.p_hat)
    np.testing.assert_allclose(out.components, wigner_d(0.5, w)[:, 0], atol=1e-14)
    np.testing.assert_allclose(out.new_p_hat, lam.inverse() @ lab.p_hat, atol=1e-14)


def test_semigroup_closure_and_phase_product():
    rng = np.random.default_rng(12)
    lab = GamowLabel.from_mass_width(0.5, 1.3, 0.2)
    ident = LorentzTransform.identity()
    for _ in range(200):
        x1, x2 = random_forward(rng, 5), random_forward(rng, 5)
        assert in_forward_cone(x1 + x2)
        p1 = transform_gamow(lab, ident, x1).phase
        p2 = transform_gamow(lab, ident, x2).phase
        p12 = transform_gamow(lab, ident, x1 + x2).phase
        np.testing.assert_allclose(p1 * p2, p12, rtol=1e-12)


def test_rest_phase_matches_nonrelativistic():
    m, g = 1.7, 0.25
    lab = GamowLabel.from_mass_width(0, m, g)
    line = ResonanceLine(m, g)
    psi = RationalHardyFunction.power(1 + 2j, 2)
    for t in (0.0, 1.0, 7.5, 30.0):
        phase = transform_gamow(lab, LorentzTransform.identity(), FourVector(t)).phase
        amp = gamow_amplitude(line, psi, t) / psi(line.z_r)
        np.testing.assert_allclose(phase, amp, rtol=1e-12)
