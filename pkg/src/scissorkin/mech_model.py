"""Parametric TSDAM unit design and the mechanism data model.

A mechanism is a set of nodes (pin locations), links (rigid bodies, listed
by their two end nodes) and revolute joints. Each joint sits at a node and
connects exactly two links, so a node where k links meet carries k - 1
joints. One link is the fixed base; the ground node O lies on it.

Node placement is closed form per mechanism family:

``tsdam``
    The triple scissors unit. Rods lie on a lattice spanned by
    ``(a sin(t/2), +-a cos(t/2)) / 4`` where ``a`` is the central rod
    length, so every scissor cell shares the opening angle ``t``. Top and
    bottom closing links form two knee dyads that are horizontal at full
    deployment and never reach a toggle position.
``four_bar``
    Planar four-bar, ``theta`` is the crank angle.
``static``
    Rest coordinates at every ``theta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError

# deployed heights from the published 12/18/24-unit designs
DEFAULT_HEIGHTS = {12: 5.09, 18: 3.436, 24: 2.581}
DEPLOYED_ANGLE_DEG = 80.0
STOWED_ANGLE_DEG = 12.54
Y_AXIS = (0.0, 1.0, 0.0)


def stretched_length(D: float, N: int) -> float:
    """Chord of the regular N-gon inscribed in the aperture circle."""
    if N < 3:
        raise DomainError(f"a ring needs at least 3 units, got {N}")
    if not D > 0:
        raise DomainError("aperture diameter must be positive")
    return D * math.sin(math.pi / N)


def default_height(D: float, N: int) -> float:
    if N in DEFAULT_HEIGHTS and D == 25.0:
        return DEFAULT_HEIGHTS[N]
    # height-to-span ratio of the 12-unit reference design
    return stretched_length(D, N) * DEFAULT_HEIGHTS[12] / stretched_length(25.0, 12)


@dataclass(frozen=True)
class DesignParams:
    D: float
    N: int
    H: float
    theta1: float
    theta2: float

    def __post_init__(self):
        if not (math.isfinite(self.D) and self.D > 0):
            raise DomainError("aperture diameter must be positive")
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"unit count must be an integer >= 3, got {self.N}")
        if not (math.isfinite(self.H) and self.H > 0):
            raise DomainError("unit height must be positive")
        if not 0 < self.theta2 < self.theta1 < math.pi:
            raise DomainError("angles must satisfy 0 < stowed < deployed < pi")

    @property
    def alpha(self) -> float:
        return 2 * math.pi / self.N

    @classmethod
    def from_degrees(cls, D=25.0, N=12, H=None, theta1_deg=DEPLOYED_ANGLE_DEG, theta2_deg=STOWED_ANGLE_DEG):
        if int(N) != N or N < 3:
            raise DomainError(f"unit count must be an integer >= 3, got {N}")
        N = int(N)
        if H is None:
            H = default_height(D, N)
        return cls(float(D), N, float(H), math.radians(theta1_deg), math.radians(theta2_deg))


@dataclass(frozen=True)
class LinkSet:
    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    l6: float
    l7: float
    l8: float
    l9: float
    l10: float
    l11: float
    l12: float
    l13: float
    l14: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f"l{i}") for i in range(1, 15))

    def as_dict(self) -> dict:
        return {f"L{i}": getattr(self, f"l{i}") for i in range(1, 15)}


def link_lengths(H: float, theta1: float) -> LinkSet:
    if not H > 0:
        raise DomainError("unit height must be positive")
    if not 1e-6 < theta1 < math.pi - 1e-6:
        raise DomainError(f"deployed angle {theta1!r} rad is degenerate")
    diag = H / math.cos(theta1 / 2)
    horiz = (H / 2) * math.tan(theta1 / 2)
    half = diag / 2
    quarter = half / 2
    return LinkSet(diag, diag, horiz, horiz, horiz, horiz, half, half, half, half,
                   quarter, quarter, quarter, quarter)


def chord_width(L: float, theta: float) -> float:
    return L * math.sqrt(max(0.0, 2 * (1 + math.cos(theta))))


def solve_angle_from_width(L: float, W: float) -> float:
    if not L > 0:
        raise DomainError("rod length must be positive")
    if W < 0 or W > 2 * L:
        raise DomainError(f"width {W} outside [0, 2L] for L = {L}")
    return 2 * math.acos(W / (2 * L))


# -- data model ---------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    id: str
    rest: tuple
    role: str = ""


@dataclass(frozen=True)
class Link:
    id: str
    nodes: tuple
    length: float


@dataclass(frozen=True)
class Joint:
    id: str
    node: str
    links: tuple  # (a, b); a positive rate turns b relative to a about +axis
    axis: tuple = Y_AXIS
    type: str = "revolute"


@dataclass(frozen=True)
class MechanismModel:
    nodes: tuple
    links: tuple
    joints: tuple
    ground: str
    base_link: str
    drive: str
    family: str = "static"
    theta_joint: str | None = None
    params: dict = field(default_factory=dict)
    design: DesignParams | None = None
    interface: tuple = ()

    def __post_init__(self):
        node_ids = {n.id for n in self.nodes}
        link_ids = {l.id for l in self.links}
        joint_ids = {j.id for j in self.joints}
        if len(node_ids) != len(self.nodes) or len(link_ids) != len(self.links) or len(joint_ids) != len(self.joints):
            raise DomainError("duplicate node, link or joint id")
        for l in self.links:
            if len(l.nodes) != 2 or not set(l.nodes) <= node_ids:
                raise DomainError(f"link {l.id} references unknown nodes {l.nodes}")
            if not l.length > 0:
                raise DomainError(f"link {l.id} has non-positive length")
        for j in self.joints:
            if j.type != "revolute":
                raise DomainError(f"joint {j.id}: only revolute joints are supported")
            if j.node not in node_ids or len(j.links) != 2 or not set(j.links) <= link_ids or j.links[0] == j.links[1]:
                raise DomainError(f"joint {j.id} references unknown node or links")
        if self.ground not in node_ids:
            raise DomainError(f"ground node {self.ground} does not exist")
        if self.base_link not in link_ids:
            raise DomainError(f"base link {self.base_link} does not exist")
        if self.drive not in joint_ids:
            raise DomainError(f"drive joint {self.drive} does not exist")
        if self.theta_joint is not None and self.theta_joint not in joint_ids:
            raise DomainError(f"theta joint {self.theta_joint} does not exist")
        if self.family not in FAMILIES:
            raise DomainError(f"unknown mechanism family {self.family!r}")

    @cached_property
    def node_index(self) -> dict:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def link_index(self) -> dict:
        return {l.id: i for i, l in enumerate(self.links)}

    @cached_property
    def joint_index(self) -> dict:
        return {j.id: i for i, j in enumerate(self.joints)}

    @cached_property
    def node_ids(self) -> list:
        return [n.id for n in self.nodes]

    @cached_property
    def joint_ids(self) -> list:
        return [j.id for j in self.joints]

    def link(self, link_id: str) -> Link:
        return self.links[self.link_index[link_id]]

    def joint(self, joint_id: str) -> Joint:
        return self.joints[self.joint_index[joint_id]]

    @cached_property
    def link_members(self) -> dict:
        """Nodes carried by each link: its two ends plus every joint node on it."""
        members = {l.id: list(l.nodes) for l in self.links}
        for j in self.joints:
            for lid in j.links:
                if j.node not in members[lid]:
                    members[lid].append(j.node)
        return {k: tuple(v) for k, v in members.items()}

    @cached_property
    def carrier(self) -> dict:
        """Link whose motion is reported for each node (first attached link)."""
        out = {}
        for l in self.links:
            for nid in self.link_members[l.id]:
                out.setdefault(nid, l.id)
        if self.ground in out and self.ground in self.link_members[self.base_link]:
            out[self.ground] = self.base_link
        return out

    def nodes_with_role(self, role: str) -> list:
        return [n.id for n in self.nodes if n.role == role]

    def with_link_length(self, link_id: str, length: float) -> MechanismModel:
        links = tuple(Link(l.id, l.nodes, length) if l.id == link_id else l for l in self.links)
        return _replace(self, links=links)

    def with_drive(self, joint_id: str) -> MechanismModel:
        return _replace(self, drive=joint_id)

    def scaled(self, k: float) -> MechanismModel:
        if not k > 0:
            raise DomainError("scale factor must be positive")
        nodes = tuple(Node(n.id, tuple(k * x for x in n.rest), n.role) for n in self.nodes)
        links = tuple(Link(l.id, l.nodes, k * l.length) for l in self.links)
        params = dict(self.params)
        for key in list(params):
            if key.endswith("_m"):
                params[key] = k * params[key]
        return _replace(self, nodes=nodes, links=links, params=params)

    def reordered(self, joint_order=None, link_order=None) -> MechanismModel:
        joints = self.joints if joint_order is None else tuple(self.joint(j) for j in joint_order)
        links = self.links if link_order is None else tuple(self.link(l) for l in link_order)
        return _replace(self, joints=joints, links=links)


def _replace(model: MechanismModel, **changes) -> MechanismModel:
    kw = {f: getattr(model, f) for f in MechanismModel.__dataclass_fields__}
    kw.update(changes)
    return MechanismModel(**kw)


# -- placement ----------------------------------------------------------------

def knee_point(p, q, lp, lq, sign):
    """Apex of the triangle with base p-q (2-vectors) and sides lp, lq."""
    d = q - p
    L = math.hypot(d[0], d[1])
    if L == 0 or L > lp + lq or L < abs(lp - lq):
        raise DomainError(f"dyad cannot close: base {L:.6g}, sides {lp:.6g}, {lq:.6g}")
    x = (lp * lp - lq * lq + L * L) / (2 * L)
    h = math.sqrt(max(0.0, lp * lp - x * x))
    e = d / L
    n = np.array([-e[1], e[0]])
    return p + x * e + sign * h * n


# lattice coordinates (i, j): x = i * a sin(t/2) / 4, z = j * a cos(t/2) / 4
TSDAM_LATTICE = {
    "BL": (-2, 0), "BR": (2, 0), "TL": (-2, 4), "TR": (2, 4), "C": (0, 2),
    "P1R": (1, 3), "P2R": (1, 1), "MR": (2, 2), "RTR": (3, 3), "RBR": (3, 1),
    "P1L": (-1, 3), "P2L": (-1, 1), "ML": (-2, 2), "LTL": (-3, 3), "LBL": (-3, 1),
}
TSDAM_ROLES = {
    "RTR": "peripheral", "RBR": "peripheral", "LTL": "peripheral", "LBL": "peripheral",
    "C": "inner", "QT": "inner", "QB": "inner",
    "KB": "ground",
}
TSDAM_LINKS = (
    ("L1", "BL", "TR", 1), ("L2", "BR", "TL", 2),
    ("L3", "TL", "KT", 3), ("L4", "KT", "QT", 4),
    ("L5", "KB", "BR", 5), ("L6", "KB", "QB", 6),
    ("L7", "P2R", "RTR", 7), ("L8", "P1R", "RBR", 8),
    ("L9", "P2L", "LTL", 9), ("L10", "P1L", "LBL", 10),
    ("L11", "TR", "RTR", 11), ("L12", "BR", "RBR", 12),
    ("L13", "TL", "LTL", 13), ("L14", "BL", "LBL", 14),
)
# (joint id, node, link a, link b)
TSDAM_JOINTS = (
    ("J01", "KB", "L5", "L6"),
    ("J02", "C", "L2", "L1"),
    ("J03", "BR", "L5", "L2"),
    ("J04", "BR", "L2", "L12"),
    ("J05", "BL", "L1", "L14"),
    ("J06", "TL", "L2", "L3"),
    ("J07", "TL", "L2", "L13"),
    ("J08", "TR", "L1", "L11"),
    ("J09", "P1R", "L1", "L8"),
    ("J10", "P2R", "L2", "L7"),
    ("J11", "MR", "L7", "L8"),
    ("J12", "RTR", "L7", "L11"),
    ("J13", "RBR", "L8", "L12"),
    ("J14", "P1L", "L2", "L10"),
    ("J15", "P2L", "L1", "L9"),
    ("J16", "ML", "L9", "L10"),
    ("J17", "LTL", "L9", "L13"),
    ("J18", "LBL", "L10", "L14"),
    ("J19", "KT", "L3", "L4"),
    ("J20", "QT", "L1", "L4"),
    ("J21", "QB", "L1", "L6"),
)
TSDAM_INTERFACE = (("RTR", "LTL"), ("RBR", "LBL"))


def _tsdam_canonical(model: MechanismModel, theta: float) -> dict:
    """Planar (x, z) positions with the scissor bisector vertical, BL-BR midpoint at origin."""
    a = model.link("L1").length
    s, c = math.sin(theta / 2), math.cos(theta / 2)
    dx, dz = a * s / 4, a * c / 4
    p = {k: np.array([i * dx, j * dz]) for k, (i, j) in TSDAM_LATTICE.items()}
    diag = p["TR"] - p["BL"]
    p["QT"] = p["BL"] + model.params["qt_fraction"] * diag
    p["QB"] = p["BL"] + model.params["qb_fraction"] * diag
    p["KT"] = knee_point(p["TL"], p["QT"], model.link("L3").length, model.link("L4").length, 1.0)
    p["KB"] = knee_point(p["BR"], p["QB"], model.link("L5").length, model.link("L6").length, 1.0)
    return p


def _tsdam_positions(model: MechanismModel, theta: float) -> np.ndarray:
    p = _tsdam_canonical(model, theta)
    # ground frame: KB at the origin, base link L5 along +x
    e = p["BR"] - p["KB"]
    e = e / math.hypot(e[0], e[1])
    R = np.array([[e[0], e[1]], [-e[1], e[0]]])
    off = -model.params.get("apothem_m", 0.0)
    out = np.empty((len(model.nodes), 3))
    for i, n in enumerate(model.nodes):
        x, z = R @ (p[n.id] - p["KB"])
        out[i] = (x, off, z)
    return out


def _four_bar_positions(model: MechanismModel, theta: float) -> np.ndarray:
    g, r = model.params["ground_m"], model.params["crank_m"]
    A0 = np.array([0.0, 0.0])
    B0 = np.array([g, 0.0])
    A = np.array([r * math.cos(theta), r * math.sin(theta)])
    B = knee_point(A, B0, model.params["coupler_m"], model.params["rocker_m"], model.params.get("branch", 1.0))
    pts = {"A0": A0, "B0": B0, "A": A, "B": B}
    return np.array([[pts[n.id][0], 0.0, pts[n.id][1]] for n in model.nodes])


def _static_positions(model: MechanismModel, theta: float) -> np.ndarray:
    return np.array([n.rest for n in model.nodes], dtype=float)


FAMILIES = {"tsdam": _tsdam_positions, "four_bar": _four_bar_positions, "static": _static_positions}


def positions_array(model: MechanismModel, theta: float) -> np.ndarray:
    """Node positions as an (n_nodes, 3) array in ``model.nodes`` order."""
    if not (math.isfinite(theta) and 0 < theta < math.pi):
        raise DomainError(f"theta = {theta!r} rad outside (0, pi)")
    return FAMILIES[model.family](model, theta)


def node_positions(model: MechanismModel, theta: float) -> dict:
    pos = positions_array(model, theta)
    return {nid: pos[i] for i, nid in enumerate(model.node_ids)}


def in_design_range(model: MechanismModel, theta: float) -> bool:
    if model.design is None:
        return True
    return model.design.theta2 - 1e-12 <= theta <= model.design.theta1 + 1e-12


def rest_angle(model: MechanismModel) -> float:
    """Angle at which the rest coordinates were generated."""
    if model.design is not None:
        return model.design.theta1
    if "theta_rest_rad" in model.params:
        return model.params["theta_rest_rad"]
    if model.family == "static":
        return math.pi / 2
    raise DomainError("model has no rest angle; pass one explicitly")


def canonical_positions(model: MechanismModel, theta: float) -> dict:
    """Unit-frame (x, z) positions with the unit upright; ground-frame positions for other families."""
    if model.family == "tsdam":
        return _tsdam_canonical(model, theta)
    pos = positions_array(model, theta)
    return {nid: pos[i, [0, 2]] for i, nid in enumerate(model.node_ids)}


def link_length_errors(model: MechanismModel, pos: np.ndarray) -> np.ndarray:
    idx = model.node_index
    out = np.empty(len(model.links))
    for k, l in enumerate(model.links):
        d = pos[idx[l.nodes[0]]] - pos[idx[l.nodes[1]]]
        out[k] = math.sqrt(d @ d) - l.length
    return out


def rigidity_errors(model: MechanismModel, pos: np.ndarray, ref: np.ndarray) -> float:
    """Largest change of any pairwise distance between nodes carried by one link."""
    idx = model.node_index
    worst = 0.0
    for members in model.link_members.values():
        ii = [idx[m] for m in members]
        for u in range(len(ii)):
            for v in range(u + 1, len(ii)):
                d = np.linalg.norm(pos[ii[u]] - pos[ii[v]]) - np.linalg.norm(ref[ii[u]] - ref[ii[v]])
                worst = max(worst, abs(d))
    return worst


# -- generators ---------------------------------------------------------------

def build_unit(params: DesignParams) -> MechanismModel:
    """Reference triple scissors unit for a design, rest pose at full deployment."""
    ls = link_lengths(params.H, params.theta1)
    lengths = ls.as_tuple()
    c1 = math.cos(params.theta1 / 2)
    a = ls.l1
    span = 1.5 * a * math.sin(params.theta1 / 2)
    model_params = {
        # pin fractions along L1 (from BL) that make L3/L5 horizontal at theta1
        "qt_fraction": c1 * c1,
        "qb_fraction": 1 - c1 * c1,
        # outer nodes of neighbouring units coincide at theta1
        "apothem_m": span / (2 * math.tan(math.pi / params.N)),
    }
    names = list(TSDAM_LATTICE) + ["QT", "QB", "KT", "KB"]
    links = tuple(Link(lid, (na, nb), lengths[k - 1]) for lid, na, nb, k in TSDAM_LINKS)
    joints = tuple(Joint(jid, node, (la, lb)) for jid, node, la, lb in TSDAM_JOINTS)
    stub = MechanismModel(
        nodes=tuple(Node(n, (0.0, 0.0, 0.0), TSDAM_ROLES.get(n, "")) for n in names),
        links=links, joints=joints, ground="KB", base_link="L5", drive="J01",
        family="tsdam", theta_joint="J02", params=model_params, design=params,
        interface=TSDAM_INTERFACE,
    )
    rest = positions_array(stub, params.theta1)
    nodes = tuple(Node(n.id, tuple(float(x) for x in rest[i]), n.role) for i, n in enumerate(stub.nodes))
    return _replace(stub, nodes=nodes)


def reference_unit() -> MechanismModel:
    return build_unit(DesignParams.from_degrees())


def four_bar(ground=4.0, crank=1.5, coupler=3.5, rocker=3.0, theta_rest=math.radians(60)) -> MechanismModel:
    params = {"ground_m": ground, "crank_m": crank, "coupler_m": coupler, "rocker_m": rocker, "branch": 1.0,
              "theta_rest_rad": theta_rest}
    links = (
        Link("ground", ("A0", "B0"), ground), Link("crank", ("A0", "A"), crank),
        Link("coupler", ("A", "B"), coupler), Link("rocker", ("B0", "B"), rocker),
    )
    joints = (
        Joint("J1", "A0", ("crank", "ground")), Joint("J2", "A", ("crank", "coupler")),
        Joint("J3", "B", ("coupler", "rocker")), Joint("J4", "B0", ("rocker", "ground")),
    )
    stub = MechanismModel(
        nodes=tuple(Node(n, (0.0, 0.0, 0.0)) for n in ("A0", "A", "B", "B0")),
        links=links, joints=joints, ground="A0", base_link="ground", drive="J1",
        family="four_bar", theta_joint="J1", params=params,
    )
    rest = positions_array(stub, theta_rest)
    nodes = tuple(Node(n.id, tuple(float(x) for x in rest[i])) for i, n in enumerate(stub.nodes))
    return _replace(stub, nodes=nodes)


def _static(points: dict, bars: list, joints: list, ground: str, base: str, drive: str) -> MechanismModel:
    nodes = tuple(Node(k, tuple(float(x) for x in v)) for k, v in points.items())
    pts = {k: np.asarray(v, dtype=float) for k, v in points.items()}
    links = tuple(Link(lid, (a, b), float(np.linalg.norm(pts[a] - pts[b]))) for lid, a, b in bars)
    js = tuple(Joint(jid, node, (la, lb)) for jid, node, la, lb in joints)
    return MechanismModel(nodes, links, js, ground=ground, base_link=base, drive=drive)


def rigid_triangle() -> MechanismModel:
    return _static(
        {"A": (0, 0, 0), "B": (2, 0, 0), "C": (0.7, 0, 1.5)},
        [("AB", "A", "B"), ("BC", "B", "C"), ("CA", "C", "A")],
        [("J1", "A", "AB", "CA"), ("J2", "B", "AB", "BC"), ("J3", "C", "BC", "CA")],
        ground="A", base="AB", drive="J2",
    )


def open_chain() -> MechanismModel:
    return _static(
        {"A": (0, 0, 0), "B": (1, 0, 0), "C": (2, 0, 0.5), "D": (2.5, 0, 1.5)},
        [("base", "A", "B"), ("l1", "B", "C"), ("l2", "C", "D")],
        [("J1", "B", "base", "l1"), ("J2", "C", "l1", "l2")],
        ground="A", base="base", drive="J1",
    )


def two_dyads() -> MechanismModel:
    return _static(
        {"A": (0, 0, 0), "B": (1, 0, 0), "C": (1, 0, 1), "D": (5, 0, 0), "E": (6, 0, 0), "F": (6, 0, 1)},
        [("ab", "A", "B"), ("bc", "B", "C"), ("de", "D", "E"), ("ef", "E", "F")],
        [("J1", "B", "ab", "bc"), ("J2", "E", "de", "ef")],
        ground="A", base="ab", drive="J1",
    )


# -- design report ------------------------------------------------------------

@dataclass(frozen=True)
class DesignReport:
    units: int
    stretched_length: float
    deployed_height: float
    stowed_height: float
    deployed_diameter: float
    stowed_diameter: float
    deployed_volume: float
    stowed_volume: float
    ratio_diameter: float
    ratio_height: float
    ratio_volume: float
    volume_method: str = "circumscribing cylinder pi*(d/2)^2*h"

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def unit_extent(model: MechanismModel, theta: float) -> tuple[float, float]:
    """(width, height) of the upright unit at ``theta``."""
    pts = np.array(list(canonical_positions(model, theta).values()))
    return float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1]))


def design_report(params: DesignParams) -> DesignReport:
    model = build_unit(params)
    w1, h1 = unit_extent(model, params.theta1)
    w2, h2 = unit_extent(model, params.theta2)
    k = math.sin(math.pi / params.N)
    d1, d2 = w1 / k, w2 / k
    v1 = math.pi * (d1 / 2) ** 2 * h1
    v2 = math.pi * (d2 / 2) ** 2 * h2
    return DesignReport(
        units=params.N, stretched_length=stretched_length(params.D, params.N),
        deployed_height=h1, stowed_height=h2, deployed_diameter=d1, stowed_diameter=d2,
        deployed_volume=v1, stowed_volume=v2,
        ratio_diameter=d1 / d2, ratio_height=h1 / h2, ratio_volume=v1 / v2,
    )
