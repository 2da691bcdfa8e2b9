import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scissorkin.errors import DomainError
from scissorkin.screw_algebra import (
    ScrewAxisParams, SpatialAccel, Twist, bracket_array, check_rotation, cross, hat, lie_bracket,
    revolute_screw, ring_rotation, rotate_twist, scissor_joint_location, scissor_joint_screw,
    spatial_accel_point, twist_point_velocity,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
six = st.lists(finite, min_size=6, max_size=6).map(np.array)


def expm(X, terms=40):
    out = np.eye(4)
    term = np.eye(4)
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def test_scissor_screw_example_theta_80():
    S = scissor_joint_screw(ScrewAxisParams(math.radians(80), 3.32, 0.0))
    assert np.allclose(S.as_array(), [0, 1, 0, 2.5433, 0, 2.1341], atol=1e-4)


def test_scissor_screw_closed_and_open_limits():
    S = scissor_joint_screw(ScrewAxisParams(0.0, 2.0, 0.5))
    assert np.allclose(S.as_array(), [0, 1, 0, 2.0, 0, 0.5])
    S = scissor_joint_screw(ScrewAxisParams(math.pi, 2.0, 0.5))
    assert np.allclose(S.as_array(), [0, 1, 0, 0.0, 0, 2.5], atol=1e-15)


@pytest.mark.parametrize("theta", [-0.1, math.pi + 0.1, math.nan])
def test_scissor_screw_rejects_bad_angles(theta):
    with pytest.raises(DomainError):
        ScrewAxisParams(theta, 1.0)


def test_tabulated_screw_is_row_flip_of_standard_screw():
    # for a Y axis the tabulated layout differs from (u; p x u) only in the x moment sign
    p = ScrewAxisParams(1.1, 2.3, 0.4)
    tab = scissor_joint_screw(p).as_array()
    std = revolute_screw((0, 1, 0), scissor_joint_location(p)).as_array()
    assert np.allclose(tab * [1, 1, 1, -1, 1, 1], std)


def test_revolute_screw_moment_is_point_cross_axis():
    S = revolute_screw((0, 0, 2), (1, 2, 3))
    assert np.allclose(S.omega, [0, 0, 1])
    assert np.allclose(S.vel, np.cross([1, 2, 3], [0, 0, 1]))
    # the axis point itself does not move
    _, v = twist_point_velocity(S, (1, 2, 3))
    assert np.allclose(v, 0)


def test_bracket_of_parallel_axes_is_pure_translation():
    a = revolute_screw((0, 1, 0), (0, 0, 0))
    b = revolute_screw((0, 1, 0), (1, 0, 0))
    br = lie_bracket(a, b)
    assert np.allclose(br.omega, 0)
    # hand computation: w1 x v2 - w2 x v1 with v1 = 0, v2 = (1,0,0) x (0,1,0) = (0,0,1)
    assert np.allclose(br.vel, np.cross([0, 1, 0], [0, 0, 1]))


def test_bracket_of_zero_twist_is_zero():
    S = revolute_screw((0, 1, 0), (3, 0, 1))
    assert lie_bracket(Twist.zero(), S) == Twist.zero()


@settings(max_examples=200, deadline=None)
@given(six, six)
def test_bracket_antisymmetric(a, b):
    assert np.allclose(bracket_array(a, b), -bracket_array(b, a), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(six, six, six)
def test_bracket_jacobi(a, b, c):
    j = bracket_array(a, bracket_array(b, c)) + bracket_array(b, bracket_array(c, a)) + bracket_array(c, bracket_array(a, b))
    assert np.max(np.abs(j)) <= 1e-9 * max(1.0, np.max(np.abs(a)) * np.max(np.abs(b)) * np.max(np.abs(c)))


@settings(max_examples=100, deadline=None)
@given(six, six, finite, finite)
def test_bracket_bilinear(a, b, x, y):
    lhs = lie_bracket(Twist.from_array(x * a), Twist.from_array(y * b)).as_array()
    assert np.allclose(lhs, x * y * bracket_array(a, b), atol=1e-9 * (1 + abs(x * y)) * 100)


@settings(max_examples=50, deadline=None)
@given(six, six)
def test_bracket_matches_matrix_commutator(a, b):
    A, B = hat(a), hat(b)
    assert np.allclose(hat(bracket_array(a, b)), A @ B - B @ A, atol=1e-9)


def test_bracket_is_derivative_of_adjoint_action():
    # d/dt exp(t A) B exp(-t A) at t = 0 equals [A, B]
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=6), rng.normal(size=6)
    h = 1e-5
    A, B = hat(a), hat(b)
    f = lambda t: expm(t * A) @ B @ expm(-t * A)
    fd = (f(h) - f(-h)) / (2 * h)
    assert np.allclose(fd, hat(bracket_array(a, b)), atol=1e-8)


def test_vectorised_cross_matches_numpy():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
    assert np.allclose(cross(a, b), np.cross(a, b))


def test_twist_arithmetic():
    a = Twist((1, 2, 3), (4, 5, 6))
    b = Twist((1, 1, 1), (0, 0, 0))
    assert (a + b) - b == a
    assert 2 * a == Twist((2, 4, 6), (8, 10, 12))
    assert -a == a * -1
    with pytest.raises((TypeError, ValueError)):
        a.omega[0] = 9.0


def test_point_acceleration_of_uniform_rotation_is_centripetal():
    w = 2.0
    V = revolute_screw((0, 0, 1), (0, 0, 0)) * w
    A = SpatialAccel.zero()
    r = np.array([1.5, 0, 0])
    eps, a = spatial_accel_point(A, V.omega, V.vel, r)
    assert np.allclose(eps, 0)
    assert np.allclose(a, [-w * w * 1.5, 0, 0])


def test_point_acceleration_about_offset_axis():
    # rotation at rate w about a z axis through c: a point at distance d accelerates by w^2 d towards c
    c = np.array([2.0, -1.0, 0.0])
    w = 0.7
    V = revolute_screw((0, 0, 1), c) * w
    # spatial acceleration of a steady rotation is zero: d/dt(w S) = w [V, S] = 0
    r = c + np.array([0.0, 3.0, 0.0])
    _, a = spatial_accel_point(SpatialAccel.zero(), V.omega, V.vel, r)
    assert np.allclose(a, -w * w * (r - c))


@pytest.mark.parametrize("j", [0, 1, 5, 11])
def test_ring_rotation_is_proper(j):
    R = ring_rotation(j, math.pi / 6)
    check_rotation(R)
    assert np.allclose(R @ [1, 0, 0], [math.cos(j * math.pi / 6), math.sin(j * math.pi / 6), 0])


def test_ring_rotation_rejects_negative_index():
    with pytest.raises(DomainError):
        ring_rotation(-1, 0.3)


def test_rotate_twist_rejects_reflection():
    with pytest.raises(DomainError):
        rotate_twist(np.diag([1.0, 1.0, -1.0]), Twist.zero())


def test_rotate_twist_commutes_with_bracket():
    rng = np.random.default_rng(1)
    R = ring_rotation(3, math.pi / 6)
    a, b = (Twist.from_array(rng.normal(size=6)) for _ in range(2))
    lhs = rotate_twist(R, lie_bracket(a, b)).as_array()
    rhs = lie_bracket(rotate_twist(R, a), rotate_twist(R, b)).as_array()
    assert np.allclose(lhs, rhs)
