"""Deployment simulation: drive profiles, trajectory logs, node statistics,
unit-to-unit comparison and assembly of the full ring from one unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DomainError, MobilityError
from .kinematics import sample
from .mech_model import MechanismModel, STOWED_ANGLE_DEG, DEPLOYED_ANGLE_DEG
from .screw_algebra import ring_rotation

DEPLOY_TIME = 53.0
CYCLE_TIME = 102.0
DEFAULT_DT = 0.05
KINDS = ("linear", "smoothstep")

# (report key, log array, scale to report units, unit string)
QUANTITIES = (
    ("linear_velocity", "vel", 1000.0, "mm/s"),
    ("angular_velocity", "omega", 1.0, "rad/s"),
    ("linear_acceleration", "acc", 1000.0, "mm/s^2"),
    ("angular_acceleration", "eps", 1.0, "rad/s^2"),
)
VECTOR_FIELDS = ("pos", "vel", "omega", "acc", "eps")


@dataclass(frozen=True)
class DriveProfile:
    """Opening angle history. With ``cycle`` the unit retracts after ``t_deploy``
    along the mirrored shape and is back at ``theta_start`` at ``t_cycle``."""

    kind: str = "linear"
    theta_start: float = math.radians(STOWED_ANGLE_DEG)
    theta_end: float = math.radians(DEPLOYED_ANGLE_DEG)
    t_deploy: float = DEPLOY_TIME
    cycle: bool = False
    t_cycle: float = CYCLE_TIME

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.t_deploy) and self.t_deploy > 0):
            raise DomainError("deployment time must be positive")
        if self.theta_start == self.theta_end:
            raise DomainError("start and end angles must differ")
        for th in (self.theta_start, self.theta_end):
            if not 0 < th < math.pi:
                raise DomainError(f"angle {th!r} rad outside (0, pi)")
        if self.cycle and not self.t_cycle > self.t_deploy:
            raise DomainError("cycle time must exceed the deployment time")

    @property
    def duration(self) -> float:
        return self.t_cycle if self.cycle else self.t_deploy


def _shape(kind: str, u: float) -> tuple[float, float, float]:
    if kind == "linear":
        return u, 1.0, 0.0
    return u * u * (3 - 2 * u), 6 * u * (1 - u), 6 - 12 * u


def theta_of_t(profile: DriveProfile, t: float) -> tuple[float, float, float]:
    """(theta, theta_dot, theta_ddot) at time ``t``.

    A linear profile switches rate sign at ``t_deploy``; the one-sided rate of
    the current phase is returned there (the deploying one at ``t_deploy``).
    """
    T = profile.duration
    if not (math.isfinite(t) and -1e-12 <= t <= T * (1 + 1e-12)):
        raise DomainError(f"t = {t!r} s outside [0, {T}]")
    t = min(max(t, 0.0), T)
    d = profile.theta_end - profile.theta_start
    if t <= profile.t_deploy:
        span, u, sign, origin = profile.t_deploy, t / profile.t_deploy, 1.0, profile.theta_start
    else:
        span = profile.t_cycle - profile.t_deploy
        u, sign, origin = (t - profile.t_deploy) / span, -1.0, profile.theta_end
    f, df, ddf = _shape(profile.kind, u)
    return origin + sign * d * f, sign * d * df / span, sign * d * ddf / span ** 2


def sample_times(profile: DriveProfile, dt: float) -> np.ndarray:
    """t = k dt up to the duration; the end time is appended if dt does not divide it."""
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError("time step must be positive")
    T = profile.duration
    n = int(math.floor(T / dt + 1e-9))
    t = np.arange(n + 1) * dt
    if T - t[-1] > 1e-9 * T:
        t = np.append(t, T)
    t[-1] = min(t[-1], T)
    return t


@dataclass(frozen=True, eq=False)
class TrajectoryLog:
    """Node motion over time; vector fields are (n_samples, n_nodes, 3) arrays."""

    t: np.ndarray
    theta: np.ndarray
    nodes: tuple
    pos: np.ndarray
    vel: np.ndarray
    omega: np.ndarray
    acc: np.ndarray
    eps: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.t), len(self.nodes), 3)
        if len(self.theta) != len(self.t):
            raise DomainError("theta and t lengths differ")
        for name in VECTOR_FIELDS:
            if getattr(self, name).shape != shape:
                raise DomainError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    def __len__(self):
        return len(self.t)

    def node_index(self, node: str) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise KeyError(node) from None

    def series(self, node: str, quantity: str) -> np.ndarray:
        return getattr(self, quantity)[:, self.node_index(node)]

    def select(self, nodes) -> TrajectoryLog:
        cols = [self.node_index(n) for n in nodes]
        return TrajectoryLog(self.t, self.theta, tuple(nodes),
                             *(getattr(self, f)[:, cols] for f in VECTOR_FIELDS), meta=dict(self.meta))


def simulate(model: MechanismModel, profile: DriveProfile | None = None, dt: float = DEFAULT_DT,
             frame=None) -> TrajectoryLog:
    """Sample the kinematics along a drive profile. Positions are closed form at each
    sample, so nothing drifts; rates follow from the prescribed opening rate.
    ``frame`` solves the unit at a rotated placement, e.g. its slot in the ring."""
    profile = profile or DriveProfile()
    times = sample_times(profile, dt)
    T, n = len(times), len(model.nodes)
    theta = np.empty(T)
    arrays = {f: np.empty((T, n, 3)) for f in VECTOR_FIELDS}
    for k, t in enumerate(times):
        th, thd, thdd = theta_of_t(profile, float(t))
        try:
            pos, om, v, ep, a, _, _ = sample(model, th, thd, thdd, frame)
        except MobilityError as exc:
            raise MobilityError(f"simulation failed at t = {t:.6g} s, theta = {math.degrees(th):.6g} deg: {exc}") from exc
        theta[k] = th
        arrays["pos"][k], arrays["vel"][k], arrays["omega"][k] = pos, v, om
        arrays["acc"][k], arrays["eps"][k] = a, ep
    meta = {"profile": profile.kind, "dt_s": dt, "cycle": profile.cycle, "units": 1}
    return TrajectoryLog(times, theta, tuple(model.node_ids), meta=meta, **arrays)


# -- statistics ---------------------------------------------------------------

def series_stats(values) -> tuple[float, float, float]:
    """(max, min, mean) of a scalar series."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot summarise an empty series")
    return float(x.max()), float(x.min()), float(x.mean())


@dataclass(frozen=True)
class NodeStats:
    """table[node][quantity] = (max, min, mean) of the magnitude, in report units."""

    table: dict
    units: dict

    def as_dict(self) -> dict:
        return {
            "units": dict(self.units),
            "nodes": {
                node: {q: {"max": mx, "min": mn, "avg": av} for q, (mx, mn, av) in row.items()}
                for node, row in self.table.items()
            },
        }


def node_stats(log: TrajectoryLog) -> NodeStats:
    if len(log) == 0 or not log.nodes:
        raise DomainError("trajectory log is empty")
    table = {}
    mags = {key: np.linalg.norm(getattr(log, f), axis=-1) * k for key, f, k, _ in QUANTITIES}
    for i, node in enumerate(log.nodes):
        table[node] = {key: series_stats(mags[key][:, i]) for key, *_ in QUANTITIES}
    return NodeStats(table, {key: unit for key, _, _, unit in QUANTITIES})


@dataclass(frozen=True)
class UnitComparison:
    mse: dict
    rmse: dict


def compare_units(log_a: TrajectoryLog, log_b: TrajectoryLog, align: tuple | None = None) -> UnitComparison:
    """Pointwise MSE/RMSE per quantity over every sample, node and component.

    ``align = (j, alpha)`` first maps ``log_b`` back by the ring rotation j*alpha,
    so a unit of the ring can be compared against unit 0 in its own frame.
    """
    if len(log_a.t) != len(log_b.t) or not np.allclose(log_a.t, log_b.t, rtol=0, atol=1e-9):
        raise AlignmentError("logs do not share timestamps")
    if set(log_a.nodes) != set(log_b.nodes):
        missing = sorted(set(log_a.nodes) ^ set(log_b.nodes))
        raise AlignmentError(f"logs have different node sets; unmatched: {missing}")
    log_b = log_b.select(log_a.nodes)
    if align is not None:
        log_b = rotate_log(log_b, ring_rotation(align[0], align[1]).T)
    mse, rmse = {}, {}
    for key, f, _, _ in QUANTITIES:
        d = getattr(log_a, f) - getattr(log_b, f)
        mse[key] = float(np.mean(d * d))
        rmse[key] = math.sqrt(mse[key])
    return UnitComparison(mse, rmse)


# -- ring assembly ------------------------------------------------------------

def rotate_log(log: TrajectoryLog, R: np.ndarray) -> TrajectoryLog:
    Rt = np.asarray(R, dtype=float).T
    return TrajectoryLog(log.t, log.theta, log.nodes,
                         *(getattr(log, f) @ Rt for f in VECTOR_FIELDS), meta=dict(log.meta))


def unit_prefix(j: int) -> str:
    return f"u{j:02d}/"


def ring_assembly(log_unit0: TrajectoryLog, N: int, alpha: float | None = None, interface=()) -> TrajectoryLog:
    """Copies of a unit log rotated by j*alpha about the ring axis, j = 0..N-1.

    Node ids become ``uJJ/<node>``. ``interface`` pairs (a, b) name a node a of
    one unit that coincides with node b of the next; each unit's b nodes are
    dropped so shared nodes appear once. N = 1 returns the input unchanged.
    """
    if N < 1:
        raise DomainError("ring needs at least one unit")
    if N == 1:
        return log_unit0
    alpha = 2 * math.pi / N if alpha is None else alpha
    dropped = {b for _, b in interface}
    keep = [n for n in log_unit0.nodes if n not in dropped]
    base = log_unit0.select(keep)
    parts = [rotate_log(base, ring_rotation(j, alpha)) for j in range(N)]
    nodes = tuple(unit_prefix(j) + n for j in range(N) for n in keep)
    arrays = {f: np.concatenate([getattr(p, f) for p in parts], axis=1) for f in VECTOR_FIELDS}
    meta = dict(log_unit0.meta, units=N, alpha_rad=alpha)
    return TrajectoryLog(log_unit0.t, log_unit0.theta, nodes, meta=meta, **arrays)


def unit_log(ring: TrajectoryLog, j: int) -> TrajectoryLog:
    """Nodes of unit j with the unit prefix stripped."""
    prefix = unit_prefix(j)
    nodes = [n for n in ring.nodes if n.startswith(prefix)]
    if not nodes:
        raise KeyError(f"no nodes for unit {j}")
    sub = ring.select(nodes)
    return TrajectoryLog(sub.t, sub.theta, tuple(n[len(prefix):] for n in nodes),
                         *(getattr(sub, f) for f in VECTOR_FIELDS), meta=dict(sub.meta, units=1))
