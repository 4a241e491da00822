"""Nodal finite-difference discretization of the network operator.

Each edge ``j`` is split into ``N_j`` uniform cells.  Interior nodes of all
edges come first (edges in declaration order), then the ``n`` vertex values.
Edge endpoints are not separate unknowns: the nodal value at ``x = 0`` or
``x = 1`` *is* the shared vertex value, so continuity across vertices holds
by construction.

The stiffness matrix is the matrix of the discrete energy form

    a_h(U, V) = sum_j mu_j sum_k c_j(x_{k+1/2}) (u_{k+1} - u_k)(v_{k+1} - v_k) / h_j
              + sum_j mu_j h_j sum_k w_k p_j(x_k) u_k v_k  -  <M r, q>

against a lumped (trapezoid) mass, so the dynamic Kirchhoff law appears in
the vertex rows without being imposed separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import polynomial as P

from .errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class GridLayout:
    cells: tuple
    n_vertices: int
    tails: tuple
    heads: tuple
    offsets: tuple

    @property
    def n_interior(self):
        return self.offsets[-1]

    @property
    def dim(self):
        return self.n_interior + self.n_vertices

    @property
    def m(self):
        return len(self.cells)

    def h(self, j):
        return 1.0 / self.cells[j]

    def vertex_index(self, i):
        return self.n_interior + i

    @property
    def vertex_slice(self):
        return slice(self.n_interior, self.dim)

    def interior_indices(self, j):
        return np.arange(self.offsets[j], self.offsets[j + 1])

    def interior_positions(self, j):
        N = self.cells[j]
        return np.arange(1, N) / N

    def edge_nodes(self, j):
        """Flat indices of all ``N_j + 1`` nodes of edge ``j``, endpoints included."""
        return np.concatenate(
            [[self.vertex_index(self.tails[j])], self.interior_indices(j), [self.vertex_index(self.heads[j])]]
        )

    def positions(self, j):
        return np.linspace(0.0, 1.0, self.cells[j] + 1)

    def column_names(self):
        """Labels ``e<j>_x<k>`` and ``v<i>`` (1-based) in flat order."""
        names = [f"e{j + 1}_x{k}" for j in range(self.m) for k in range(1, self.cells[j])]
        return names + [f"v{i + 1}" for i in range(self.n_vertices)]


def build_grid(model, N):
    """Uniform per-edge grid; ``N`` is one cell count or one per edge."""
    cells = np.atleast_1d(np.asarray(N))
    if cells.size == 1:
        cells = np.repeat(cells, model.m)
    if len(cells) != model.m:
        raise ConfigurationError(f"need {model.m} cell counts, got {len(cells)}")
    if any(int(c) != c or c < 2 for c in cells):
        raise ConfigurationError(f"every edge needs at least 2 cells, got {list(cells)}")
    cells = tuple(int(c) for c in cells)
    offsets = tuple(int(v) for v in np.concatenate([[0], np.cumsum([c - 1 for c in cells])]))
    return GridLayout(
        cells=cells,
        n_vertices=model.n_vertices,
        tails=tuple(e.tail for e in model.edges),
        heads=tuple(e.head for e in model.edges),
        offsets=offsets,
    )


def assemble_mass(model, grid):
    """Lumped mass: ``mu_j h_j`` inside edges, ``1 + sum mu_j h_j / 2`` at vertices."""
    mass = np.empty(grid.dim)
    vert = np.ones(grid.n_vertices)
    for j, e in enumerate(model.edges):
        w = e.mu * grid.h(j)
        mass[grid.interior_indices(j)] = w
        vert[e.tail] += 0.5 * w
        vert[e.head] += 0.5 * w
    mass[grid.vertex_slice] = vert
    return mass


def assemble_stiffness(model, grid):
    rows, cols, vals = [], [], []
    for j, e in enumerate(model.edges):
        N, h = grid.cells[j], grid.h(j)
        nodes = grid.edge_nodes(j)
        xm = (np.arange(N) + 0.5) * h
        a = e.mu * e.c(xm) / h
        left, right = nodes[:-1], nodes[1:]
        rows += [left, right, left, right]
        cols += [left, right, right, left]
        vals += [a, a, -a, -a]
        if not e.p.is_zero:
            w = np.ones(N + 1)
            w[[0, -1]] = 0.5
            rows.append(nodes)
            cols.append(nodes)
            vals.append(e.mu * h * w * e.p(grid.positions(j)))
    vi = np.arange(grid.n_interior, grid.dim)
    R, C = np.meshgrid(vi, vi, indexing="ij")
    rows.append(R.ravel())
    cols.append(C.ravel())
    vals.append(-np.asarray(model.M).ravel())
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.dim, grid.dim)
    ).tocsr()
    K.eliminate_zeros()
    return K


def assemble_drift1(model, grid):
    """Central differences ``d_j(x_k) (u_{k+1} - u_{k-1}) / (2 h_j)``; vertex rows zero."""
    rows, cols, vals = [], [], []
    for j, e in enumerate(model.edges):
        if e.d.is_zero:
            continue
        nodes = grid.edge_nodes(j)
        w = e.d(grid.interior_positions(j)) / (2.0 * grid.h(j))
        rows += [nodes[1:-1], nodes[1:-1]]
        cols += [nodes[2:], nodes[:-2]]
        vals += [w, -w]
    if not rows:
        return sp.csr_matrix((grid.dim, grid.dim))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.dim, grid.dim)
    ).tocsr()


@dataclass(frozen=True)
class DiscreteOperator:
    """Assembled matrices for one model and grid.

    The generator is ``A_h = -diag(mass)^{-1} stiffness``; ``drift1`` is kept
    apart since the energy form has no first-order term.
    """

    model: object
    layout: GridLayout
    mass: np.ndarray
    stiffness: sp.csr_matrix
    drift1: sp.csr_matrix

    @property
    def dim(self):
        return self.layout.dim

    def generator_dense(self):
        return -self.stiffness.toarray() / self.mass[:, None]


def assemble(model, N):
    grid = build_grid(model, N)
    mass = assemble_mass(model, grid)
    mass.setflags(write=False)
    return DiscreteOperator(model, grid, mass, assemble_stiffness(model, grid), assemble_drift1(model, grid))


def generator_apply(op, U):
    U = np.asarray(U, dtype=float)
    if U.shape[0] != op.dim:
        raise ContractViolation(f"state length {U.shape[0]} does not match operator dimension {op.dim}")
    mass = op.mass if U.ndim == 1 else op.mass[:, None]
    return -(op.stiffness @ U) / mass


def sample_profile(op, profile, atol=1e-12):
    """Nodal vector of a per-edge polynomial profile (lists of coefficients, lowest first).

    Raises :class:`ContractViolation` if the edge polynomials disagree at a
    shared vertex.
    """
    grid, model = op.layout, op.model
    if len(profile) != grid.m:
        raise ContractViolation(f"profile needs {grid.m} edge polynomials, got {len(profile)}")
    U = np.empty(grid.dim)
    seen = [[] for _ in range(grid.n_vertices)]
    for j, coeffs in enumerate(profile):
        U[grid.interior_indices(j)] = P.polyval(grid.interior_positions(j), coeffs)
        seen[model.edges[j].tail].append(P.polyval(0.0, coeffs))
        seen[model.edges[j].head].append(P.polyval(1.0, coeffs))
    for i, vals in enumerate(seen):
        if max(vals) - min(vals) > atol * (1.0 + max(abs(v) for v in vals)):
            raise ContractViolation(f"profile is discontinuous at vertex {i + 1}: values {vals}")
        U[grid.vertex_index(i)] = vals[0]
    return U


def kirchhoff_residual(op, profile):
    """Per-vertex defect of the discrete vertex rows against the Kirchhoff law.

    The vertex row of the discrete form action, ``-(K_h U)_i``, which equals
    ``mass_i (A_h U)_i``, is compared with the exact right-hand side
    ``[M r]_i + sum_j phi_ij mu_j c_j(v_i) u_j'(v_i)`` of the profile.  This
    scaling makes the defect vanish exactly for constant data with ``p = 0``.
    """
    model = op.model
    U = sample_profile(op, profile)
    r = U[op.layout.vertex_slice]
    exact = np.asarray(model.M) @ r
    for j, coeffs in enumerate(profile):
        e = model.edges[j]
        der = P.polyder(np.atleast_1d(np.asarray(coeffs, dtype=float)))
        exact[e.tail] += e.mu * float(e.c(0.0)) * P.polyval(0.0, der)
        exact[e.head] -= e.mu * float(e.c(1.0)) * P.polyval(1.0, der)
    discrete = -(op.stiffness @ U)[op.layout.vertex_slice]
    return discrete - exact
