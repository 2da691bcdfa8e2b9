"""Mechanism files (JSON), trajectory CSV and statistics reports.

Angles are degrees in files and radians in memory; the conversion happens
only here. Parameter keys ending in ``_rad`` are written with a ``_deg``
suffix and converted back on reading.
"""
from __future__ import annotations

import csv
import io as _stdio
import json
import math
from pathlib import Path

import numpy as np

from .deploy_sim import NodeStats, TrajectoryLog
from .errors import DomainError, FormatError
from .mech_model import DesignParams, Joint, Link, MechanismModel, Node

FORMAT_TAG = "scissorkin-mechanism/1"
CSV_HEADER = ("t_s", "node", "theta_deg", "x_m", "y_m", "z_m", "vx", "vy", "vz",
              "wx", "wy", "wz", "ax", "ay", "az", "ex", "ey", "ez")
CSV_FIELDS = ("pos", "vel", "omega", "acc", "eps")


# -- angle conversion ---------------------------------------------------------

def to_degrees(rad: float) -> float:
    """Degree value that converts back to exactly ``rad``, when one exists nearby."""
    deg = math.degrees(rad)
    cand = deg
    for _ in range(8):
        if math.radians(cand) == rad:
            return cand
        cand = float(np.nextafter(cand, math.inf if math.radians(cand) < rad else -math.inf))
    return deg


def to_radians(deg: float) -> float:
    return math.radians(deg)


# -- mechanism files ----------------------------------------------------------

def _params_out(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if k.endswith("_rad"):
            out[k[:-4] + "_deg"] = to_degrees(v)
        else:
            out[k] = v
    return out


def _params_in(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if k.endswith("_deg"):
            out[k[:-4] + "_rad"] = to_radians(v)
        else:
            out[k] = v
    return out


def model_to_dict(model: MechanismModel) -> dict:
    doc = {
        "format": FORMAT_TAG,
        "family": model.family,
        "ground": model.ground,
        "base_link": model.base_link,
        "drive": model.drive,
        "theta_joint": model.theta_joint,
        "params": _params_out(model.params),
        "nodes": [{"id": n.id, "rest": list(n.rest), "role": n.role} for n in model.nodes],
        "links": [{"id": l.id, "nodes": list(l.nodes), "length_m": l.length} for l in model.links],
        "joints": [{"id": j.id, "type": j.type, "node": j.node, "axis": list(j.axis), "links": list(j.links)}
                   for j in model.joints],
        "interface": [list(p) for p in model.interface],
    }
    if model.design is not None:
        d = model.design
        doc["design"] = {"D_m": d.D, "N": d.N, "H_m": d.H,
                         "theta1_deg": to_degrees(d.theta1), "theta2_deg": to_degrees(d.theta2)}
    return doc


def dumps_model(model: MechanismModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def write_model(model: MechanismModel, path) -> None:
    Path(path).write_text(dumps_model(model))


def _get(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _floats(seq, n, where):
    if not isinstance(seq, list) or len(seq) != n:
        raise FormatError(f"{where}: expected a list of {n} numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in seq):
        raise FormatError(f"{where}: expected numbers")
    return tuple(float(x) for x in seq)


def model_from_dict(doc: dict, source: str = "<mechanism>") -> MechanismModel:
    if not isinstance(doc, dict):
        raise FormatError(f"{source}: top level must be an object")
    tag = doc.get("format", FORMAT_TAG)
    if tag != FORMAT_TAG:
        raise FormatError(f"{source}: unsupported format {tag!r}")
    nodes = []
    for k, n in enumerate(_get(doc, "nodes", source, list)):
        w = f"{source}: nodes[{k}]"
        nodes.append(Node(str(_get(n, "id", w)), _floats(_get(n, "rest", w), 3, w + ".rest"), str(n.get("role", ""))))
    links = []
    for k, l in enumerate(_get(doc, "links", source, list)):
        w = f"{source}: links[{k}]"
        ends = _get(l, "nodes", w, list)
        if len(ends) != 2:
            raise FormatError(f"{w}.nodes: a link joins exactly two nodes")
        length = _get(l, "length_m", w)
        if not isinstance(length, (int, float)) or isinstance(length, bool):
            raise FormatError(f"{w}.length_m: expected a number")
        links.append(Link(str(_get(l, "id", w)), tuple(str(x) for x in ends), float(length)))
    joints = []
    for k, j in enumerate(_get(doc, "joints", source, list)):
        w = f"{source}: joints[{k}]"
        jl = _get(j, "links", w, list)
        if len(jl) != 2:
            raise FormatError(f"{w}.links: a joint connects exactly two links")
        joints.append(Joint(str(_get(j, "id", w)), str(_get(j, "node", w)), tuple(str(x) for x in jl),
                            _floats(j.get("axis", [0.0, 1.0, 0.0]), 3, w + ".axis"),
                            str(j.get("type", "revolute"))))
    design = None
    if doc.get("design") is not None:
        d = doc["design"]
        w = f"{source}: design"
        N = _get(d, "N", w)
        if not isinstance(N, int) or isinstance(N, bool):
            raise FormatError(f"{w}.N: expected an integer")
        try:
            design = DesignParams(float(_get(d, "D_m", w)), N, float(_get(d, "H_m", w)),
                                  to_radians(float(_get(d, "theta1_deg", w))), to_radians(float(_get(d, "theta2_deg", w))))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{w}: {exc}") from exc
    interface = doc.get("interface", [])
    if not isinstance(interface, list) or not all(isinstance(p, list) and len(p) == 2 for p in interface):
        raise FormatError(f"{source}: interface must be a list of node pairs")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise FormatError(f"{source}: params must be an object")
    try:
        return MechanismModel(
            nodes=tuple(nodes), links=tuple(links), joints=tuple(joints),
            ground=str(_get(doc, "ground", source)), base_link=str(_get(doc, "base_link", source)),
            drive=str(_get(doc, "drive", source)), family=str(doc.get("family", "static")),
            theta_joint=doc.get("theta_joint"), params=_params_in(params), design=design,
            interface=tuple(tuple(str(x) for x in p) for p in interface),
        )
    except DomainError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def loads_model(text: str, source: str = "<mechanism>") -> MechanismModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc, source)


def read_model(path) -> MechanismModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    return loads_model(text, str(path))


# -- trajectory CSV -----------------------------------------------------------

_ROW = "%.12g,%s,%.12g" + ",%.12g" * 15 + "\n"


def write_trajectory_csv(log: TrajectoryLog, out) -> None:
    """One row per (sample, node); ``out`` is a path or a text stream."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_trajectory_csv(log, fh)
        return
    out.write(",".join(CSV_HEADER) + "\n")
    block = np.concatenate([getattr(log, f) for f in CSV_FIELDS], axis=2)  # (T, n, 15)
    deg = np.degrees(log.theta)
    for k in range(len(log.t)):
        t, th = float(log.t[k]), float(deg[k])
        rows = block[k].tolist()
        out.write("".join(_ROW % (t, node, th, *row) for node, row in zip(log.nodes, rows)))


def dumps_trajectory_csv(log: TrajectoryLog) -> str:
    buf = _stdio.StringIO()
    write_trajectory_csv(log, buf)
    return buf.getvalue()


def read_trajectory_csv(source) -> TrajectoryLog:
    """Parse a trajectory CSV; every sample must list the same nodes in the same order."""
    name = str(source) if isinstance(source, (str, Path)) else "<csv>"
    if isinstance(source, (str, Path)):
        try:
            with open(source, newline="") as fh:
                return _parse_csv(fh, name)
        except OSError as exc:
            raise FormatError(f"{name}: {exc.strerror}") from exc
    return _parse_csv(source, name)


def _parse_csv(fh, name) -> TrajectoryLog:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise FormatError(f"{name}: empty file")
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise FormatError(f"{name}:1: unexpected header {header!r}")
    times, thetas, nodes, values = [], [], [], []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise FormatError(f"{name}:{line}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        try:
            nums = [float(x) for x in (row[0], row[2], *row[3:])]
        except ValueError as exc:
            raise FormatError(f"{name}:{line}: {exc}") from exc
        if not all(math.isfinite(x) for x in nums):
            raise FormatError(f"{name}:{line}: non-finite value")
        times.append(nums[0])
        thetas.append(nums[1])
        nodes.append(row[1])
        values.append(nums[2:])
    if not times:
        raise FormatError(f"{name}: no data rows")
    t_all = np.array(times)
    # a new sample starts wherever the time stamp changes
    starts = np.flatnonzero(np.r_[True, t_all[1:] != t_all[:-1]])
    n = int(np.diff(np.r_[starts, len(t_all)])[0])
    order = tuple(nodes[:n])
    if len(t_all) % n or np.any(np.diff(starts) != n):
        raise FormatError(f"{name}: samples list different numbers of nodes")
    T = len(t_all) // n
    if any(tuple(nodes[k * n:(k + 1) * n]) != order for k in range(T)):
        raise FormatError(f"{name}: node order differs between samples")
    data = np.array(values).reshape(T, n, 15)
    arrays = {f: data[:, :, 3 * i:3 * i + 3] for i, f in enumerate(CSV_FIELDS)}
    return TrajectoryLog(t_all[starts], np.radians(np.array(thetas)[starts]), order, **arrays)


# -- reports ------------------------------------------------------------------

def stats_to_json(stats: NodeStats, meta: dict | None = None) -> str:
    doc = stats.as_dict()
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=2) + "\n"
