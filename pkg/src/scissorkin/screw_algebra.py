"""Twists, spatial accelerations and the se(3) bracket.

Every 6-vector in this package is ordered (angular; linear). For a twist the
linear block is the velocity of the body point instantaneously at the frame
origin, so a revolute joint with unit axis ``u`` through point ``p`` has the
screw ``(u; p x u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

Vec3 = np.ndarray
RigidRotation = np.ndarray

ORTHO_TOL = 1e-12


def vec3(x) -> Vec3:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"non-finite vector {v!r}")
    return v


def _frozen(v):
    v = np.array(v, dtype=float).reshape(3)
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class Twist:
    omega: np.ndarray
    vel: np.ndarray
    unit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega))
        object.__setattr__(self, "vel", _frozen(self.vel))

    @classmethod
    def zero(cls) -> Twist:
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_array(cls, x) -> Twist:
        x = np.asarray(x, dtype=float).reshape(6)
        return cls(x[:3], x[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.omega, self.vel])

    def __add__(self, other: Twist) -> Twist:
        return Twist(self.omega + other.omega, self.vel + other.vel)

    def __sub__(self, other: Twist) -> Twist:
        return Twist(self.omega - other.omega, self.vel - other.vel)

    def __neg__(self) -> Twist:
        return Twist(-self.omega, -self.vel)

    def __mul__(self, k: float) -> Twist:
        return Twist(k * self.omega, k * self.vel)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Twist):
            return NotImplemented
        return bool(np.array_equal(self.omega, other.omega) and np.array_equal(self.vel, other.vel))

    def __repr__(self):
        return f"Twist(omega={self.omega.tolist()}, vel={self.vel.tolist()})"


@dataclass(frozen=True, eq=False)
class SpatialAccel:
    """Time derivative of a spatial twist: (eps; a - w x v) at the frame origin."""

    eps: np.ndarray
    lin: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eps", _frozen(self.eps))
        object.__setattr__(self, "lin", _frozen(self.lin))

    @classmethod
    def zero(cls) -> SpatialAccel:
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_array(cls, x) -> SpatialAccel:
        x = np.asarray(x, dtype=float).reshape(6)
        return cls(x[:3], x[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.eps, self.lin])

    def __add__(self, other: SpatialAccel) -> SpatialAccel:
        return SpatialAccel(self.eps + other.eps, self.lin + other.lin)

    def __repr__(self):
        return f"SpatialAccel(eps={self.eps.tolist()}, lin={self.lin.tolist()})"


@dataclass(frozen=True)
class ScrewAxisParams:
    theta: float
    L: float
    n: float = 0.0

    def __post_init__(self):
        for name in ("theta", "L", "n"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"scissor angle {self.theta!r} rad outside [0, pi]")
        if self.L <= 0:
            raise DomainError("L must be positive")


def scissor_joint_screw(p: ScrewAxisParams) -> Twist:
    """Tabulated screw of a scissor-cell joint with axis along Y.

    Returns ``(0, 1, 0, L cos(theta/2), 0, n + L sin(theta/2))``, the joint
    location ``r = (n + L sin(theta/2), 0, L cos(theta/2))`` written in the
    published component layout. That layout differs from ``revolute_screw``
    only in the sign of the x moment; for mechanisms whose joint axes are all
    parallel to Y this is a fixed row sign flip and leaves loop null spaces
    unchanged. Velocity and acceleration propagation use ``revolute_screw``.
    """
    h = 0.5 * p.theta
    return Twist((0.0, 1.0, 0.0), (p.L * math.cos(h), 0.0, p.n + p.L * math.sin(h)), unit=True)


def scissor_joint_location(p: ScrewAxisParams) -> Vec3:
    h = 0.5 * p.theta
    return np.array([p.n + p.L * math.sin(h), 0.0, p.L * math.cos(h)])


def revolute_screw(axis, point) -> Twist:
    u = vec3(axis)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise DomainError("revolute axis must be nonzero")
    u = u / norm
    return Twist(u, np.cross(vec3(point), u), unit=True)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product over the last axis; much cheaper than np.cross on small arrays."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def bracket_array(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Bracket of 6-vectors, broadcasting over leading axes."""
    w1, v1 = s1[..., :3], s1[..., 3:]
    w2, v2 = s2[..., :3], s2[..., 3:]
    return np.concatenate([cross(w1, w2), cross(w1, v2) - cross(w2, v1)], axis=-1)


def lie_bracket(s1: Twist, s2: Twist) -> Twist:
    """se(3) bracket ((w1 x w2); (w1 x v2 - w2 x v1)).

    Bilinear, so ``lie_bracket(a*S1, b*S2) == a*b*lie_bracket(S1, S2)``.
    """
    return Twist(
        np.cross(s1.omega, s2.omega),
        np.cross(s1.omega, s2.vel) - np.cross(s2.omega, s1.vel),
    )


def hat(t) -> np.ndarray:
    """4x4 homogeneous matrix form of a twist."""
    x = t.as_array() if isinstance(t, Twist) else np.asarray(t, dtype=float)
    w, v = x[:3], x[3:]
    m = np.zeros((4, 4))
    m[:3, :3] = [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    m[:3, 3] = v
    return m


def ring_rotation(j: int, alpha: float) -> RigidRotation:
    if j < 0:
        raise DomainError("ring index must be non-negative")
    c, s = math.cos(j * alpha), math.sin(j * alpha)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def check_rotation(R) -> RigidRotation:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise DomainError("rotation must be a finite 3x3 matrix")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHO_TOL or np.linalg.det(R) < 0:
        raise DomainError("matrix is not a proper rotation")
    return R


def rotate_twist(R: RigidRotation, t: Twist) -> Twist:
    # frames share an origin on the ring axis, so the adjoint reduces to R on both blocks
    R = check_rotation(R)
    return Twist(R @ t.omega, R @ t.vel)


def twist_point_velocity(V: Twist, r) -> tuple[Vec3, Vec3]:
    r = vec3(r)
    return V.omega.copy(), V.vel + np.cross(V.omega, r)


def spatial_accel_point(A: SpatialAccel, omega, v_lin, r) -> tuple[Vec3, Vec3]:
    """Angular and linear acceleration of the body point at ``r``.

    ``v_lin`` is the linear block of the body's twist (velocity of the point
    at the origin); the result is ``A.lin + w x v_lin + eps x r + w x (w x r)``.
    """
    omega, v_lin, r = vec3(omega), vec3(v_lin), vec3(r)
    a = A.lin + np.cross(omega, v_lin) + np.cross(A.eps, r) + np.cross(omega, np.cross(omega, r))
    return A.eps.copy(), a
