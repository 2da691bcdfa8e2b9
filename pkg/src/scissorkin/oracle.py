"""Finite-difference references for node velocities and accelerations.

These only call ``node_positions`` along a prescribed opening-angle history
theta(t) = theta0 + theta_dot t + theta_ddot t^2 / 2, never the screw code.
"""
from __future__ import annotations

import numpy as np

from .errors import OracleError
from .mech_model import MechanismModel, positions_array

VEL_STEP = 1e-5
ACC_STEP = 1e-4


def _theta(t, theta0, theta_dot, theta_ddot):
    return theta0 + theta_dot * t + 0.5 * theta_ddot * t * t


def fd_velocity(model: MechanismModel, theta: float, theta_dot: float, theta_ddot: float = 0.0,
                h: float = VEL_STEP) -> np.ndarray:
    if not h > 0:
        raise OracleError("step must be positive")
    p1 = positions_array(model, _theta(h, theta, theta_dot, theta_ddot))
    p0 = positions_array(model, _theta(-h, theta, theta_dot, theta_ddot))
    return (p1 - p0) / (2 * h)


def fd_acceleration(model: MechanismModel, theta: float, theta_dot: float, theta_ddot: float = 0.0,
                    h: float = ACC_STEP) -> np.ndarray:
    if not h > 0:
        raise OracleError("step must be positive")
    p1 = positions_array(model, _theta(h, theta, theta_dot, theta_ddot))
    p = positions_array(model, theta)
    p0 = positions_array(model, _theta(-h, theta, theta_dot, theta_ddot))
    return (p1 - 2 * p + p0) / (h * h)


def fd_angular_velocity(model: MechanismModel, theta: float, theta_dot: float, theta_ddot: float = 0.0,
                        h: float = VEL_STEP) -> dict:
    """Y rotation rate of every link from the change of its direction (planar mechanisms)."""
    out = {}
    for sgn in (1, -1):
        pos = positions_array(model, _theta(sgn * h, theta, theta_dot, theta_ddot))
        for l in model.links:
            d = pos[model.node_index[l.nodes[1]]] - pos[model.node_index[l.nodes[0]]]
            out.setdefault(l.id, []).append(np.arctan2(d[0], d[2]))
    rates = {}
    for k, (ap, am) in out.items():
        delta = (ap - am + np.pi) % (2 * np.pi) - np.pi
        rates[k] = delta / (2 * h)
    return rates


def max_relative_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    """Largest vector error relative to the largest reference magnitude."""
    scale = np.max(np.linalg.norm(reference, axis=-1))
    err = np.max(np.linalg.norm(analytic - reference, axis=-1))
    if scale == 0:
        return float(err)
    return float(err / scale)
