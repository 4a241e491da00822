"""Network topology, incidence structures and the standing assumptions.

Vertices and edges are 0-based here; the model file and all human-facing
messages use 1-based labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .dynamics import AdditiveNoise, ZeroReaction
from .errors import ModelValidationError
from .profiles import ONE, ZERO, CoefficientProfile

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class EdgeSpec:
    """One edge ``e_j`` parametrized over [0, 1] from ``tail`` (x=0) to ``head`` (x=1)."""

    tail: int
    head: int
    mu: float = 1.0
    c: CoefficientProfile = ONE
    d: CoefficientProfile = ZERO
    p: CoefficientProfile = ZERO
    reaction: object = field(default_factory=ZeroReaction)
    edge_noise: object = field(default_factory=lambda: AdditiveNoise(0.0))

    def __post_init__(self):
        for name in ("c", "d", "p"):
            object.__setattr__(self, name, CoefficientProfile.coerce(getattr(self, name)))
        object.__setattr__(self, "mu", float(self.mu))

    def problems(self):
        out = []
        if not self.mu > 0:
            out.append(("mu", f"edge weight mu must be strictly positive (got {self.mu})"))
        cmin, _ = self.c.extrema()
        if not cmin > 0:
            out.append(("c", f"c must be strictly positive (min {cmin:.6g})"))
        pmin, _ = self.p.extrema()
        if pmin < 0:
            out.append(("p", f"p must be nonnegative (min {pmin:.6g})"))
        out += [("reaction", msg) for msg in self.reaction.check()]
        return out


@dataclass
class Violation:
    """One failed condition of the vertex-matrix assumption (``index`` is 0-based)."""

    condition: int
    index: tuple
    message: str


@dataclass
class VertexMatrixReport:
    violations: list

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_vertex_matrix(M):
    """Check the three conditions on the vertex coupling matrix.

    (1) symmetric to ``1e-12 * ||M||_inf``, (2) nonnegative off-diagonal,
    (3) strictly negative row sums.  Never raises; returns every violation.
    """
    try:
        M = np.asarray(M, dtype=float)
    except (TypeError, ValueError):
        return VertexMatrixReport([Violation(0, (), "M is not a numeric matrix")])
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return VertexMatrixReport([Violation(0, (), f"M must be square, got shape {M.shape}")])
    if not np.all(np.isfinite(M)):
        return VertexMatrixReport([Violation(0, (), "M has non-finite entries")])
    n = M.shape[0]
    out = []
    tol = SYMMETRY_RTOL * float(np.abs(M).sum(axis=1).max(initial=0.0))
    for i in range(n):
        for k in range(i + 1, n):
            if abs(M[i, k] - M[k, i]) > tol:
                out.append(Violation(1, (i, k), f"M not symmetric at ({i + 1},{k + 1}): {M[i, k]} != {M[k, i]}"))
    for i in range(n):
        for k in range(n):
            if i != k and M[i, k] < 0:
                out.append(Violation(2, (i, k), f"M off-diagonal entry ({i + 1},{k + 1}) = {M[i, k]} is negative"))
    for i, s in enumerate(M.sum(axis=1)):
        if not s < 0:
            out.append(Violation(3, (i,), f"M row {i + 1} sum = {s:+.6g}, violates strict negativity"))
    return VertexMatrixReport(out)


CONDITION_NAMES = {0: "malformed M", 1: "symmetry", 2: "nonnegative coupling", 3: "negative row sums"}


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """The full problem statement on a finite connected network.

    Construction validates every standing assumption and raises
    :class:`ModelValidationError` listing all violations.
    """

    n_vertices: int
    edges: tuple
    M: np.ndarray
    vertex_noise: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        M = np.array(self.M, dtype=float)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)
        if self.vertex_noise is None:
            object.__setattr__(self, "vertex_noise", tuple(AdditiveNoise(0.0) for _ in range(self.n_vertices)))
        else:
            object.__setattr__(self, "vertex_noise", tuple(self.vertex_noise))
        errors = self._problems()
        if errors:
            raise ModelValidationError(errors)

    def _problems(self):
        n = self.n_vertices
        errs = []
        if int(n) != n or n < 1:
            return [("vertices", f"vertex count must be a positive integer (got {n})")]
        if not self.edges:
            errs.append(("edges", "network needs at least one edge"))
        for j, e in enumerate(self.edges):
            loc = f"edges[{j + 1}]"
            bad_index = False
            for name in ("tail", "head"):
                v = getattr(e, name)
                if int(v) != v or not 0 <= v < n:
                    errs.append((f"{loc}.{name}", f"vertex index {v + 1} out of range 1..{n}"))
                    bad_index = True
            if not bad_index and e.tail == e.head:
                errs.append((loc, f"self-loop at vertex {e.tail + 1} is not supported"))
            errs += [(f"{loc}.{k}", msg) for k, msg in e.problems()]
        if len(self.vertex_noise) != n:
            errs.append(("vertex_noise", f"expected {n} vertex noise specs, got {len(self.vertex_noise)}"))
        if self.M.shape != (n, n):
            errs.append(("M", f"M must be {n}x{n}, got shape {self.M.shape}"))
        else:
            for v in validate_vertex_matrix(self.M).violations:
                errs.append(("M", f"{CONDITION_NAMES[v.condition]}: {v.message}"))
        if errs:
            return errs
        touched = np.zeros(n, dtype=bool)
        for e in self.edges:
            touched[[e.tail, e.head]] = True
        for i in np.flatnonzero(~touched):
            errs.append(("edges", f"vertex {i + 1} is isolated"))
        adj = coo_matrix(
            (np.ones(len(self.edges)), ([e.tail for e in self.edges], [e.head for e in self.edges])), shape=(n, n)
        )
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp > 1:
            errs.append(("edges", f"graph is not connected ({ncomp} components)"))
        return errs

    def __eq__(self, other):
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and self.edges == other.edges
            and self.vertex_noise == other.vertex_noise
            and np.array_equal(self.M, other.M)
        )

    __hash__ = None

    @property
    def m(self):
        return len(self.edges)

    def with_edges(self, **changes):
        """Copy with every edge updated by ``dataclasses.replace(**changes)``."""
        from dataclasses import replace

        return replace(self, edges=tuple(replace(e, **changes) for e in self.edges))


def build_incidence(model):
    """Return ``(PhiPlus, PhiMinus, Phi)`` as dense ``n x m`` arrays."""
    n, m = model.n_vertices, model.m
    plus = np.zeros((n, m))
    minus = np.zeros((n, m))
    for j, e in enumerate(model.edges):
        plus[e.tail, j] = 1.0
        minus[e.head, j] = 1.0
    return plus, minus, plus - minus


def gamma_sets(model):
    """Edge index sets incident to each vertex (0-based)."""
    sets = [set() for _ in range(model.n_vertices)]
    for j, e in enumerate(model.edges):
        sets[e.tail].add(j)
        sets[e.head].add(j)
    if not all(sets):
        raise ModelValidationError("isolated vertex")
    return sets


def weighted_incidence(model):
    """``(PhiWPlus, PhiWMinus)``: ``mu_j c_j`` at the tail / head endpoint."""
    n, m = model.n_vertices, model.m
    plus = np.zeros((n, m))
    minus = np.zeros((n, m))
    for j, e in enumerate(model.edges):
        plus[e.tail, j] = e.mu * float(e.c(0.0))
        minus[e.head, j] = e.mu * float(e.c(1.0))
    return plus, minus
