"""Loop basis, screw constraint matrix and mobility.

The joint graph has one vertex per link and one edge per joint. A spanning
tree grown from the base link plus one chord per independent loop gives the
fundamental cycles; each loop is stored as two tree paths from their lowest
common ancestor, ``left`` (ending with the chord) and ``right``, so its
constraint reads ``sum(left) == sum(right)``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraphError, OracleError
from .mech_model import MechanismModel, positions_array
from .screw_algebra import cross

RANK_RTOL = 1e-10
ORACLE_RTOL = 1e-7
DEGENERATE_GAP = 1e-6


@dataclass(frozen=True)
class Loop:
    left: tuple   # ((joint_id, +-1), ...) in traversal order
    right: tuple

    def signed(self) -> tuple:
        return self.left + tuple((j, -s) for j, s in self.right)

    @property
    def joints(self) -> tuple:
        return tuple(j for j, _ in self.signed())


@dataclass(frozen=True)
class LoopBasis:
    loops: tuple
    base: str
    tree: dict    # link -> (parent link, joint id, sign)
    order: tuple  # links in BFS order from the base

    def __len__(self):
        return len(self.loops)

    def path_from_base(self, link_id: str) -> list:
        path = []
        while link_id != self.base:
            parent, jid, s = self.tree[link_id]
            path.append((jid, s))
            link_id = parent
        return path[::-1]

    def incidence(self, joint_ids) -> np.ndarray:
        """(n_loops, n_joints) matrix of signs."""
        col = {j: k for k, j in enumerate(joint_ids)}
        M = np.zeros((len(self.loops), len(col)))
        for r, loop in enumerate(self.loops):
            for jid, s in loop.signed():
                M[r, col[jid]] += s
        return M


def _components(model: MechanismModel) -> list:
    parent = {l.id: l.id for l in model.links}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in model.joints:
        a, b = find(j.links[0]), find(j.links[1])
        if a != b:
            parent[a] = b
    groups = {}
    for l in model.links:
        groups.setdefault(find(l.id), set()).add(l.id)
    return list(groups.values())


def loop_basis(model: MechanismModel) -> LoopBasis:
    adj = {l.id: [] for l in model.links}
    for j in model.joints:
        a, b = j.links
        adj[a].append((j.id, b, 1))
        adj[b].append((j.id, a, -1))

    base = model.base_link
    tree = {}
    depth = {base: 0}
    order = [base]
    used = set()
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for jid, v, s in adj[u]:
            if v in depth:
                continue
            depth[v] = depth[u] + 1
            tree[v] = (u, jid, s)
            used.add(jid)
            order.append(v)
            queue.append(v)
    if len(depth) != len(model.links):
        raise DisconnectedGraphError(_components(model))

    basis = LoopBasis((), base, tree, tuple(order))
    loops = []
    for j in model.joints:
        if j.id in used:
            continue
        u, v = j.links
        pu, pv = basis.path_from_base(u), basis.path_from_base(v)
        k = 0
        while k < min(len(pu), len(pv)) and pu[k][0] == pv[k][0]:
            k += 1
        left = tuple(pu[k:]) + ((j.id, 1),)
        loops.append(Loop(left, tuple(pv[k:])))
    return LoopBasis(tuple(loops), base, tree, tuple(order))


def joint_screws(model: MechanismModel, pos: np.ndarray, frame=None) -> np.ndarray:
    """(n_joints, 6) unit revolute screws (u; p x u) at the current node positions.

    ``frame`` rotates the joint axes; ``pos`` must already be in that frame.
    """
    axes, rows = _joint_axes(model)
    if frame is not None:
        axes = axes @ np.asarray(frame, dtype=float).T
    return np.concatenate([axes, cross(pos[rows], axes)], axis=1)


def _joint_axes(model: MechanismModel):
    cached = model.__dict__.get("_joint_axes")
    if cached is None:
        u = np.array([j.axis for j in model.joints], dtype=float).reshape(-1, 3)
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        rows = np.array([model.node_index[j.node] for j in model.joints], dtype=int)
        cached = model.__dict__["_joint_axes"] = (u, rows)
    return cached


def stack_constraints(incidence: np.ndarray, screws: np.ndarray) -> np.ndarray:
    nl, nj = incidence.shape
    return np.einsum("lj,jk->lkj", incidence, screws).reshape(6 * nl, nj)


def nullity(matrix: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray]:
    n = matrix.shape[1]
    if matrix.shape[0] == 0 or n == 0:
        return n, np.zeros(0)
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0:
        return n, sv
    return n - int(np.sum(sv > sv[0] * rtol)), sv


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    matrix: np.ndarray
    joint_ids: tuple
    loops: LoopBasis
    theta: float
    singular_values: np.ndarray
    degenerate: bool

    @property
    def shape(self):
        return self.matrix.shape

    def smallest_nonzero_singular_value(self) -> float:
        sv = self.singular_values
        if sv.size == 0 or sv[0] == 0:
            return 0.0
        nz = sv[sv > sv[0] * RANK_RTOL]
        return float(nz[-1])


def assemble_constraints(model: MechanismModel, theta: float, basis: LoopBasis | None = None) -> ConstraintMatrix:
    basis = basis or loop_basis(model)
    screws = joint_screws(model, positions_array(model, theta))
    C = stack_constraints(basis.incidence(model.joint_ids), screws)
    _, sv = nullity(C)
    degenerate = False
    if sv.size and sv[0] > 0:
        # singular values that are neither clearly zero nor clearly nonzero
        mid = (sv > sv[0] * RANK_RTOL) & (sv < sv[0] * DEGENERATE_GAP)
        degenerate = bool(np.any(mid))
    return ConstraintMatrix(C, tuple(model.joint_ids), basis, theta, sv, degenerate)


def dof(model: MechanismModel, theta: float) -> int:
    return nullity(assemble_constraints(model, theta).matrix)[0]


# -- independent position-level oracle ---------------------------------------

def _revolute_exp(u: np.ndarray, p: np.ndarray, q: float) -> np.ndarray:
    """Rigid transform of a rotation by q about the line through p along unit u."""
    K = np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])
    R = np.eye(3) + math.sin(q) * K + (1 - math.cos(q)) * (K @ K)
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = p - R @ p
    return T


def loop_closure_residual(model: MechanismModel, basis: LoopBasis, pos: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Pose error (top 3x4 of T - I) of every loop after turning joint j by q[j]."""
    idx = model.node_index
    col = {j: k for k, j in enumerate(model.joint_ids)}
    out = []
    for loop in basis.loops:
        T = np.eye(4)
        for jid, s in loop.signed():
            qj = q[col[jid]]
            if qj == 0.0:
                continue  # identity factor
            j = model.joints[col[jid]]
            u = np.asarray(j.axis, dtype=float)
            T = T @ _revolute_exp(u / np.linalg.norm(u), pos[idx[j.node]], s * qj)
        out.append((T - np.eye(4))[:3].ravel())
    return np.concatenate(out) if out else np.zeros(0)


def numeric_dof_oracle(model: MechanismModel, theta: float, h: float = 1e-6, rtol: float = ORACLE_RTOL) -> int:
    if not h > 1e-12:
        raise OracleError(f"finite-difference step {h!r} underflows")
    basis = loop_basis(model)
    pos = positions_array(model, theta)
    n = len(model.joints)
    q0 = np.zeros(n)
    cols = []
    for k in range(n):
        dq = np.zeros(n)
        dq[k] = h
        cols.append((loop_closure_residual(model, basis, pos, q0 + dq)
                     - loop_closure_residual(model, basis, pos, q0 - dq)) / (2 * h))
    J = np.array(cols).T if cols else np.zeros((0, 0))
    return nullity(J, rtol)[0]
