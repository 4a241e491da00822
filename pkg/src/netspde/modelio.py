"""Model files (YAML) and trajectory files (CSV).

Model files use 1-based vertex labels; everything in memory is 0-based.
A minimal file::

    vertices: 2
    edges:
      - {tail: 1, head: 2, mu: 1.0, c: {kind: constant, value: 1.0}}
    M: [[-1, 0], [0, -1]]

Optional top-level keys are ``vertex_noise``, ``solver`` and ``initial``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import yaml

from .dynamics import (
    AdditiveNoise,
    BoundedMultiplicativeNoise,
    FHNReaction,
    PolynomialNoise,
    PolynomialReaction,
    ZeroReaction,
)
from .errors import ConfigurationError, ModelValidationError
from .graph import EdgeSpec, NetworkModel
from .profiles import ZERO, CoefficientProfile
from .solver import InitialCondition, SolverConfig

TOP_KEYS = {"vertices", "edges", "M", "vertex_noise", "solver", "initial"}
EDGE_KEYS = {"tail", "head", "mu", "c", "d", "p", "reaction", "edge_noise"}
SOLVER_KEYS = {"T", "dt", "N", "scheme", "paths", "q", "seed", "save_every", "taming"}


class ModelFileError(ModelValidationError):
    """Syntax or semantic problems in a model file; ``errors`` are ``(key path, message)``."""

    def __init__(self, errors, line=None, column=None):
        super().__init__(errors)
        self.line, self.column = line, column


@dataclass
class ModelBundle:
    model: NetworkModel
    config: SolverConfig
    initial: InitialCondition


class _Collector:
    def __init__(self):
        self.errors = []

    def add(self, loc, msg):
        self.errors.append((loc, msg))

    def guard(self, loc, fn, *args):
        try:
            return fn(*args)
        except ModelValidationError as exc:
            self.errors += [(loc if not l else f"{loc}.{l}" if loc else l, m) for l, m in exc.errors]
        except (TypeError, ValueError, KeyError) as exc:
            self.add(loc, str(exc) or type(exc).__name__)
        return None


def _profile(node):
    if isinstance(node, dict):
        kind = node.get("kind")
        if kind == "constant":
            return CoefficientProfile.constant(float(node["value"]))
        if kind in ("poly", "polynomial"):
            return CoefficientProfile.poly(node["values"])
        if kind == "samples":
            return CoefficientProfile.samples(node["values"])
        raise ValueError(f"unknown profile kind {kind!r} (expected constant, poly or samples)")
    return CoefficientProfile.coerce(node)


def _reaction(node):
    if node is None:
        return ZeroReaction()
    kind = node.get("kind")
    if kind == "zero":
        return ZeroReaction()
    if kind == "fhn":
        return FHNReaction(float(node["a"]))
    if kind == "polynomial":
        opt = lambda key: None if node.get(key) is None else node[key]
        lower_mod = opt("lower_modulation")
        return PolynomialReaction(
            k=node["k"],
            leading=_profile(node["leading"]),
            lower=tuple(_profile(p) for p in node["lower"]),
            leading_modulation=None if opt("leading_modulation") is None else _profile(node["leading_modulation"]),
            lower_modulation=None if lower_mod is None else tuple(None if m is None else _profile(m) for m in lower_mod),
            bounds=None if opt("bounds") is None else tuple(float(b) for b in node["bounds"]),
        )
    raise ValueError(f"unknown reaction kind {kind!r} (expected fhn, polynomial or zero)")


def _noise(node):
    if node is None:
        return AdditiveNoise(0.0)
    kind = node.get("kind")
    if kind == "additive":
        return AdditiveNoise(float(node.get("sigma", 0.0)))
    if kind == "bounded_mult":
        sat = node.get("saturation")
        return BoundedMultiplicativeNoise(float(node["sigma"]), None if sat is None else float(sat))
    if kind == "polynomial":
        cap = node.get("cap")
        return PolynomialNoise(tuple(node["coeffs"]), None if cap is None else float(cap))
    raise ValueError(f"unknown noise kind {kind!r} (expected additive, bounded_mult or polynomial)")


def _vertex_label(node, n, loc, col):
    if not isinstance(node, int) or isinstance(node, bool):
        col.add(loc, f"vertex label must be an integer, got {node!r}")
        return None
    if not 1 <= node <= n:
        col.add(loc, f"vertex index {node} out of range 1..{n}")
        return None
    return node - 1


def _unknown(col, loc, node, allowed):
    for key in node:
        if key not in allowed:
            col.add(f"{loc}.{key}" if loc else str(key), "unknown key")


def parse_model(text):
    """Parse model-file text into ``(NetworkModel, SolverConfig)``.

    Raises :class:`ModelFileError` listing every problem found; YAML syntax
    errors carry ``line`` and ``column`` (1-based).
    """
    b = parse_bundle(text)
    return b.model, b.config


def parse_bundle(text):
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line, column = (mark.line + 1, mark.column + 1) if mark else (None, None)
        where = f"line {line}, column {column}: " if mark else ""
        raise ModelFileError([("syntax", f"{where}{getattr(exc, 'problem', None) or exc}")], line, column) from None
    if not isinstance(doc, dict):
        raise ModelFileError([("", "model file must be a mapping with keys vertices, edges, M")])
    col = _Collector()
    _unknown(col, "", doc, TOP_KEYS)
    n = doc.get("vertices")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        col.add("vertices", f"must be a positive integer, got {n!r}")
        raise ModelFileError(col.errors)
    edges = []
    raw_edges = doc.get("edges")
    if not isinstance(raw_edges, list) or not raw_edges:
        col.add("edges", "must be a nonempty list")
        raw_edges = []
    for j, node in enumerate(raw_edges):
        loc = f"edges[{j + 1}]"
        if not isinstance(node, dict):
            col.add(loc, "edge must be a mapping")
            continue
        _unknown(col, loc, node, EDGE_KEYS)
        tail = _vertex_label(node.get("tail"), n, f"{loc}.tail", col)
        head = _vertex_label(node.get("head"), n, f"{loc}.head", col)
        kw = {}
        for key in ("c", "d", "p"):
            if key in node:
                kw[key] = col.guard(f"{loc}.{key}", _profile, node[key])
        if "mu" in node:
            kw["mu"] = col.guard(f"{loc}.mu", float, node["mu"])
        kw["reaction"] = col.guard(f"{loc}.reaction", _reaction, node.get("reaction"))
        kw["edge_noise"] = col.guard(f"{loc}.edge_noise", _noise, node.get("edge_noise"))
        if tail is None or head is None or any(v is None for v in kw.values()):
            continue
        edges.append(EdgeSpec(tail, head, **kw))
    M = doc.get("M")
    try:
        M = np.array(M, dtype=float)
        if M.shape != (n, n):
            col.add("M", f"must be a list of {n} rows of {n} reals, got shape {M.shape}")
            M = None
    except (TypeError, ValueError):
        col.add("M", "must be a list of rows of reals")
        M = None
    vnoise = doc.get("vertex_noise")
    vertex_noise = None
    if vnoise is not None:
        if not isinstance(vnoise, list) or len(vnoise) != n:
            col.add("vertex_noise", f"must list {n} noise specs")
        else:
            vertex_noise = [col.guard(f"vertex_noise[{i + 1}]", _noise, v) for i, v in enumerate(vnoise)]
    config = _solver(doc.get("solver") or {}, col)
    initial = col.guard("initial", _initial, doc.get("initial"))
    if col.errors or M is None or len(edges) != len(raw_edges):
        raise ModelFileError(col.errors)
    try:
        model = NetworkModel(n, tuple(edges), M, None if vertex_noise is None else tuple(vertex_noise))
    except ModelValidationError as exc:
        raise ModelFileError(exc.errors) from None
    return ModelBundle(model, config, initial)


def _solver(node, col):
    if not isinstance(node, dict):
        col.add("solver", "must be a mapping")
        return None
    _unknown(col, "solver", node, SOLVER_KEYS)
    kw = {k: node[k] for k in SOLVER_KEYS if k in node}
    try:
        return SolverConfig(**kw)
    except (ConfigurationError, TypeError) as exc:
        col.add("solver", str(exc))
        return None


def _initial(node):
    if node is None:
        return InitialCondition()
    if not isinstance(node, dict):
        return InitialCondition(constant=float(node))
    edges = node.get("edges")
    return InitialCondition(
        constant=float(node.get("constant", 0.0)),
        edges=None if edges is None else tuple(_profile(e) for e in edges),
        vertices=None if node.get("vertices") is None else tuple(float(v) for v in node["vertices"]),
    )


def read_model(path):
    """Parse a model file from disk into a :class:`ModelBundle`."""
    with open(path, encoding="utf-8") as fh:
        return parse_bundle(fh.read())


def _edge_dict(e):
    d = {"tail": e.tail + 1, "head": e.head + 1, "mu": e.mu, "c": e.c.to_dict()}
    if e.d != ZERO:
        d["d"] = e.d.to_dict()
    if e.p != ZERO:
        d["p"] = e.p.to_dict()
    d["reaction"] = e.reaction.to_dict()
    d["edge_noise"] = e.edge_noise.to_dict()
    return d


def model_to_dict(model, config=None, initial=None):
    doc = {
        "vertices": model.n_vertices,
        "edges": [_edge_dict(e) for e in model.edges],
        "M": [[float(v) for v in row] for row in model.M],
        "vertex_noise": [g.to_dict() for g in model.vertex_noise],
    }
    if config is not None:
        N = config.N
        doc["solver"] = {
            "T": config.T,
            "dt": config.dt,
            "N": N if np.isscalar(N) else [int(v) for v in N],
            "scheme": config.scheme,
            "paths": config.paths,
            "q": config.q,
            "seed": config.seed,
            "save_every": config.save_every,
        }
        if config.taming is not None:
            doc["solver"]["taming"] = config.taming
    if initial is not None and initial.to_dict():
        doc["initial"] = initial.to_dict()
    return doc


def serialize_model(model, config=None, initial=None):
    """YAML text that :func:`parse_model` turns back into an equivalent model.

    Floats are written by PyYAML's ``repr`` so they round-trip exactly.
    """
    return yaml.safe_dump(model_to_dict(model, config, initial), sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# trajectories


def trajectory_path(out, path_id):
    """``run.csv`` -> ``run_p<id>.csv``."""
    stem, dot, ext = str(out).rpartition(".")
    if not dot or "/" in ext:
        return f"{out}_p{path_id}"
    return f"{stem}_p{path_id}.{ext}"


def format_trajectory(traj, layout):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + layout.column_names())
    for t, row in zip(traj.times, traj.states):
        w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
    return buf.getvalue()


def write_trajectory(path, traj, layout):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_trajectory(traj, layout))


@dataclass
class TrajectoryTable:
    columns: list
    times: np.ndarray
    states: np.ndarray


def read_trajectory(path):
    """Read a trajectory file written by :func:`write_trajectory`."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "t":
        raise ValueError(f"{path}: missing header row starting with 't'")
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise ValueError(f"{path}: times are not strictly increasing")
    return TrajectoryTable(header[1:], times, data[:, 1:])


def write_summary(path, summary):
    """Structured run summary as YAML."""
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(summary, fh, sort_keys=False)
