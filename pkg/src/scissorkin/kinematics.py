"""Joint rates, joint accelerations and node motion of a 1-DoF mechanism.

Rates are the null vector of the loop constraint matrix scaled to the
drive. Link twists accumulate ``w_j S_j`` along the spanning tree from the
base link; because the rates close every loop the result does not depend on
the tree. Accelerations differentiate each loop equation, which adds the
pairwise brackets of the known ``w_i S_i`` terms on each side of the loop.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constraint_dof import RANK_RTOL, LoopBasis, joint_screws, loop_basis, stack_constraints
from .errors import ConsistencyError, DriveSelectionError, MobilityError
from .mech_model import MechanismModel, positions_array
from .screw_algebra import SpatialAccel, Twist, bracket_array, check_rotation, cross, ring_rotation

RATE_TOL = 1e-8
DRIVE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BodyState:
    node: str
    r: np.ndarray
    V: Twist
    omega: np.ndarray
    v: np.ndarray
    A: SpatialAccel | None = None
    eps: np.ndarray | None = None
    a: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class KinematicState:
    theta: float
    drive_rate: float
    drive_accel: float
    rates: dict
    accels: dict
    bodies: tuple

    def body(self, node: str) -> BodyState:
        for b in self.bodies:
            if b.node == node:
                return b
        raise KeyError(node)


class _Context:
    """Topology derived once per model, flattened into index arrays."""

    def __init__(self, model: MechanismModel):
        self.basis: LoopBasis = loop_basis(model)
        self.incidence = self.basis.incidence(model.joint_ids)
        jcol = model.joint_index
        lidx = model.link_index
        nl, nj = len(model.links), len(model.joints)
        edges = [(lidx[c], lidx[p], jcol[j], s)
                 for c in self.basis.order[1:]
                 for p, j, s in [self.basis.tree[c]]]
        self.edge_parent = np.array([e[1] for e in edges], dtype=int)
        self.edge_joint = np.array([e[2] for e in edges], dtype=int)
        self.edge_sign = np.array([e[3] for e in edges], dtype=float)
        edge_of = {e[0]: k for k, e in enumerate(edges)}
        # path[l, e] = 1 when tree edge e lies between the base and link l
        self.path = np.zeros((nl, len(edges)))
        for l in range(nl):
            link = l
            while link in edge_of:
                e = edge_of[link]
                self.path[l, e] = 1.0
                link = edges[e][1]
        self.carrier = np.array([lidx[model.carrier[n]] for n in model.node_ids], dtype=int)
        # loop sides flattened: joint column, sign, side id (2k left, 2k+1 right), first entry of the side
        cols, signs, side, start = [], [], [], []
        for k, loop in enumerate(self.basis.loops):
            for half, path in ((0, loop.left), (1, loop.right)):
                first = len(cols)
                for j, s in path:
                    cols.append(jcol[j])
                    signs.append(s)
                    side.append(2 * k + half)
                    start.append(first)
        self.side_col = np.array(cols, dtype=int)
        self.side_sign = np.array(signs, dtype=float)
        self.side_id = np.array(side, dtype=int)
        self.side_start = np.array(start, dtype=int)
        self.nloops = len(self.basis.loops)
        self.nj = nj


def _context(model: MechanismModel) -> _Context:
    ctx = model.__dict__.get("_kinematics_context")
    if ctx is None:
        ctx = _Context(model)
        model.__dict__["_kinematics_context"] = ctx
    return ctx


# -- array core ---------------------------------------------------------------

def _null_vector(C: np.ndarray, theta: float) -> np.ndarray:
    if C.shape[0] == 0:
        raise MobilityError(f"open chain has {C.shape[1]} DoF at theta = {theta:.6g} rad, need 1")
    _, sv, vt = np.linalg.svd(C)
    rank = int(np.sum(sv > sv[0] * RANK_RTOL))
    if C.shape[1] - rank != 1:
        raise MobilityError(f"mechanism has {C.shape[1] - rank} DoF at theta = {theta:.6g} rad, need 1")
    return vt[-1]


def _scale_to(n: np.ndarray, col: int, value: float, name: str) -> np.ndarray:
    if abs(n[col]) <= DRIVE_TOL * np.max(np.abs(n)):
        raise DriveSelectionError(f"joint {name} does not move in the mechanism's motion")
    return n * (value / n[col])


def _body_twists(ctx: _Context, screws: np.ndarray, w: np.ndarray) -> np.ndarray:
    terms = (ctx.edge_sign * w[ctx.edge_joint])[:, None] * screws[ctx.edge_joint]
    return ctx.path @ terms


def _loop_bias(ctx: _Context, screws: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per loop: sum over ordered pairs i < k of [t_i, t_k] on the left side minus the right side."""
    if ctx.nloops == 0:
        return np.zeros(0)
    terms = (ctx.side_sign * w[ctx.side_col])[:, None] * screws[ctx.side_col]
    csum = np.cumsum(terms, axis=0)
    # exclusive prefix sum restarted at the first entry of every side
    before = csum - terms
    prefix = before - before[ctx.side_start]
    pair = bracket_array(prefix, terms)
    out = np.zeros((2 * ctx.nloops, 6))
    np.add.at(out, ctx.side_id, pair)
    return (out[0::2] - out[1::2]).ravel()


def _solve_eps(C, bias, col, value, theta):
    keep = np.arange(C.shape[1]) != col
    rhs = -bias - C[:, col] * value
    sol, *_ = np.linalg.lstsq(C[:, keep], rhs, rcond=None)
    eps = np.empty(C.shape[1])
    eps[keep] = sol
    eps[col] = value
    resid = np.max(np.abs(C @ eps + bias)) if C.size else 0.0
    scale = max(np.max(np.abs(bias)) if bias.size else 0.0, np.max(np.abs(C)) * np.max(np.abs(eps)), 1e-300)
    if resid > 1e-8 * scale:
        raise MobilityError(f"acceleration constraints are singular at theta = {theta:.6g} rad")
    return eps


def _body_accels(ctx, screws, w, eps, V):
    S = screws[ctx.edge_joint]
    terms = ctx.edge_sign[:, None] * (eps[ctx.edge_joint][:, None] * S
                                      + w[ctx.edge_joint][:, None] * bracket_array(V[ctx.edge_parent], S))
    return ctx.path @ terms


def _node_motion(ctx, pos, V, A=None):
    Vn = V[ctx.carrier]
    om, vl = Vn[:, :3], Vn[:, 3:]
    v = vl + cross(om, pos)
    if A is None:
        return om, v, None, None
    An = A[ctx.carrier]
    ep = An[:, :3]
    a = An[:, 3:] + cross(om, vl) + cross(ep, pos) + cross(om, cross(om, pos))
    return om, v, ep, a


def sample(model: MechanismModel, theta: float, theta_dot: float, theta_ddot: float, frame=None):
    """Array kinematics for a prescribed opening-angle motion.

    Returns (pos, omega, v, eps, a, w, eps_joint), node arrays in model.nodes
    order and joint arrays in model.joints order. ``frame`` is a rotation
    applied to the geometry before anything is solved, e.g. to place a unit
    at its position in the ring.
    """
    ctx = _context(model)
    pos = positions_array(model, theta)
    if frame is not None:
        frame = check_rotation(frame)
        pos = pos @ frame.T
    screws = joint_screws(model, pos, frame)
    C = stack_constraints(ctx.incidence, screws)
    ref = model.theta_joint or model.drive
    col = model.joint_index[ref]
    n = _null_vector(C, theta)
    w = _scale_to(n, col, theta_dot, ref) if theta_dot != 0 else np.zeros_like(n)
    V = _body_twists(ctx, screws, w)
    eps = _solve_eps(C, _loop_bias(ctx, screws, w), col, theta_ddot, theta)
    A = _body_accels(ctx, screws, w, eps, V)
    om, v, ep, a = _node_motion(ctx, pos, V, A)
    return pos, om, v, ep, a, w, eps


# -- public operations --------------------------------------------------------

def _as_vector(model, mapping) -> np.ndarray:
    return np.array([mapping[j] for j in model.joint_ids], dtype=float)


def _as_map(model, x) -> dict:
    return {j: float(x[k]) for k, j in enumerate(model.joint_ids)}


def constraint_at(model: MechanismModel, theta: float):
    ctx = _context(model)
    pos = positions_array(model, theta)
    screws = joint_screws(model, pos)
    return pos, screws, stack_constraints(ctx.incidence, screws)


def rates_per_theta(model: MechanismModel, theta: float) -> dict:
    """Joint rates for a unit opening rate d(theta)/dt = 1."""
    _, _, C = constraint_at(model, theta)
    ref = model.theta_joint or model.drive
    return _as_map(model, _scale_to(_null_vector(C, theta), model.joint_index[ref], 1.0, ref))


def drive_sensitivity(model: MechanismModel, theta: float, drive: str | None = None) -> float:
    return rates_per_theta(model, theta)[drive or model.drive]


def solve_rates(model: MechanismModel, theta: float, drive_rate: float, drive: str | None = None) -> dict:
    drive = drive or model.drive
    _, _, C = constraint_at(model, theta)
    n = _null_vector(C, theta)
    w = _scale_to(n, model.joint_index[drive], drive_rate, drive) if drive_rate != 0 else 0.0 * n
    return _as_map(model, w)


def _check_rates(C, w, theta):
    if C.size == 0:
        return
    resid = np.max(np.abs(C @ w))
    scale = np.max(np.abs(C)) * max(np.max(np.abs(w)), 1e-300)
    if resid > RATE_TOL * scale:
        raise ConsistencyError(f"joint rates violate loop closure at theta = {theta:.6g} rad (residual {resid:.3g})")


def propagate_velocity(model: MechanismModel, theta: float, rates: dict) -> list:
    ctx = _context(model)
    pos, screws, C = constraint_at(model, theta)
    w = _as_vector(model, rates)
    _check_rates(C, w, theta)
    V = _body_twists(ctx, screws, w)
    om, v, _, _ = _node_motion(ctx, pos, V)
    return [BodyState(nid, pos[i], Twist.from_array(V[ctx.carrier[i]]), om[i], v[i])
            for i, nid in enumerate(model.node_ids)]


def link_twists(model: MechanismModel, theta: float, rates: dict) -> dict:
    ctx = _context(model)
    _, screws, _ = constraint_at(model, theta)
    V = _body_twists(ctx, screws, _as_vector(model, rates))
    return {l.id: Twist.from_array(V[k]) for k, l in enumerate(model.links)}


def lie_terms(model: MechanismModel, theta: float, rates: dict) -> np.ndarray:
    """Stacked right-hand bracket terms S_Lie(left) - S_Lie(right) of every loop."""
    ctx = _context(model)
    _, screws, _ = constraint_at(model, theta)
    return _loop_bias(ctx, screws, _as_vector(model, rates))


def solve_accels(model: MechanismModel, theta: float, rates: dict, drive_accel: float,
                 joint: str | None = None) -> dict:
    """Joint accelerations with joint ``joint`` (default: the drive) fixed to ``drive_accel``."""
    ctx = _context(model)
    _, screws, C = constraint_at(model, theta)
    _null_vector(C, theta)
    w = _as_vector(model, rates)
    joint = joint or model.drive
    eps = _solve_eps(C, _loop_bias(ctx, screws, w), model.joint_index[joint], drive_accel, theta)
    return _as_map(model, eps)


def propagate_accel(model: MechanismModel, theta: float, rates: dict, accels: dict) -> list:
    ctx = _context(model)
    pos, screws, C = constraint_at(model, theta)
    w = _as_vector(model, rates)
    eps = _as_vector(model, accels)
    _check_rates(C, w, theta)
    bias = _loop_bias(ctx, screws, w)
    if C.size:
        resid = np.max(np.abs(C @ eps + bias))
        scale = max(np.max(np.abs(C)) * np.max(np.abs(eps)), np.max(np.abs(bias)), 1e-300)
        if resid > RATE_TOL * scale:
            raise ConsistencyError(f"joint accelerations violate loop closure at theta = {theta:.6g} rad")
    V = _body_twists(ctx, screws, w)
    A = _body_accels(ctx, screws, w, eps, V)
    om, v, ep, a = _node_motion(ctx, pos, V, A)
    return [BodyState(nid, pos[i], Twist.from_array(V[ctx.carrier[i]]), om[i], v[i],
                      SpatialAccel.from_array(A[ctx.carrier[i]]), ep[i], a[i])
            for i, nid in enumerate(model.node_ids)]


def kinematic_state(model: MechanismModel, theta: float, drive_rate: float, drive_accel: float = 0.0) -> KinematicState:
    rates = solve_rates(model, theta, drive_rate)
    accels = solve_accels(model, theta, rates, drive_accel)
    bodies = propagate_accel(model, theta, rates, accels)
    return KinematicState(theta, drive_rate, drive_accel, rates, accels, tuple(bodies))


def to_global(state: KinematicState, j: int, alpha: float) -> KinematicState:
    R = ring_rotation(j, alpha)

    def rot(b: BodyState) -> BodyState:
        return replace(
            b, r=R @ b.r, V=Twist(R @ b.V.omega, R @ b.V.vel), omega=R @ b.omega, v=R @ b.v,
            A=None if b.A is None else SpatialAccel(R @ b.A.eps, R @ b.A.lin),
            eps=None if b.eps is None else R @ b.eps,
            a=None if b.a is None else R @ b.a,
        )

    return replace(state, bodies=tuple(rot(b) for b in state.bodies))


def symmetry_check(state_a: KinematicState, state_b: KinematicState, j: int = 0, alpha: float = 0.0,
                   nodes=None) -> float:
    """Largest velocity mismatch between matching nodes after undoing the ring rotation j*alpha on ``state_b``."""
    Rt = ring_rotation(j, alpha).T
    nodes = nodes if nodes is not None else [b.node for b in state_a.bodies]
    worst = 0.0
    for n in nodes:
        ba, bb = state_a.body(n), state_b.body(n)
        worst = max(worst, float(np.linalg.norm(ba.v - Rt @ bb.v)), float(np.linalg.norm(ba.omega - Rt @ bb.omega)))
    return worst
