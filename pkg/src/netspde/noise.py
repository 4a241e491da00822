"""Driving noise with counter-based addressing and refinement coupling.

Standard normals are drawn from a Philox stream keyed by ``(seed, path)`` with
the counter set from the *fine* step index, so every block is addressable by
``(seed, path, step)`` and a node's draw by its offset in the block.  Blocks
hold one normal per half-cell of the finest spatial grid plus one per vertex.

A target grid whose cells are ``rho`` times coarser and whose step is ``r``
fine steps long aggregates the half-cells covering each interior node's dual
cell and the ``r`` fine steps, then rescales; the result has variance
``dt / (mu_j h_j)`` at interior nodes and ``dt`` at vertices on every level,
while all levels see the same underlying white noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation

_MASK64 = (1 << 64) - 1


def normal_block(seed, path, step, size):
    """Standard normals addressed by ``(seed, path, step)``."""
    bitgen = np.random.Philox(key=[seed & _MASK64, path & _MASK64], counter=[0, 0, step & _MASK64, 0])
    return np.random.Generator(bitgen).standard_normal(size)


@dataclass(frozen=True)
class NoiseStream:
    """Noise source of one path.

    ``base_cells`` are the per-edge cell counts of the finest grid the noise
    lives on (``None``: the target grid itself); ``substeps`` is the number of
    fine steps aggregated into one target step.
    """

    seed: int
    path: int = 0
    base_cells: tuple | None = None
    substeps: int = 1

    def __post_init__(self):
        if self.substeps < 1:
            raise ConfigurationError("substeps must be >= 1")

    def block_size(self, grid):
        cells = self.base_cells or grid.cells
        return 2 * sum(cells) + grid.n_vertices

    def fine_blocks(self, grid, first_step, count):
        size = self.block_size(grid)
        return np.stack([normal_block(self.seed, self.path, first_step + s, size) for s in range(count)])


@dataclass(frozen=True)
class NoiseIncrement:
    """One step of scaled noise: ``edge_part`` over interior nodes (flat layout order), ``vertex_part`` over vertices."""

    edge_part: np.ndarray
    vertex_part: np.ndarray
    dt: float
    path: int
    step: int

    def as_state(self):
        return np.concatenate([self.edge_part, self.vertex_part])


def _refinement(grid, stream):
    base = stream.base_cells or grid.cells
    if len(base) != grid.m:
        raise ConfigurationError("base_cells must list one count per edge")
    rho = []
    for nb, n in zip(base, grid.cells):
        if nb % n:
            raise ConfigurationError(f"base grid with {nb} cells does not refine {n} cells")
        rho.append(nb // n)
    return base, rho


def aggregate(grid, model, dt, stream, Z):
    """Scaled increments from fine normals ``Z`` of shape ``(..., substeps, block_size)``.

    Returns ``(edge, vertex)`` with the leading axes of ``Z`` preserved.
    """
    base, rho = _refinement(grid, stream)
    Z = np.asarray(Z)
    lead, r = Z.shape[:-2], Z.shape[-2]
    edge = np.empty(lead + (grid.n_interior,))
    pos = 0
    for j, (nb, rj) in enumerate(zip(base, rho)):
        N = grid.cells[j]
        half = Z[..., rj + pos: pos + 2 * nb - rj]
        pos += 2 * nb
        inner = half.reshape(lead + (r, N - 1, 2 * rj)).sum(axis=(-3, -1))
        scale = np.sqrt(dt / (model.edges[j].mu * grid.h(j)) / (r * 2 * rj))
        edge[..., grid.offsets[j]: grid.offsets[j + 1]] = scale * inner
    vertex = np.sqrt(dt / r) * Z[..., pos: pos + grid.n_vertices].sum(axis=-2)
    return edge, vertex


def sample_increment(grid, model, dt, stream, step=0):
    """Noise increment of target step ``step`` on ``grid`` with step size ``dt``.

    Interior node ``(j, k)`` has variance ``dt / (mu_j h_j)``; vertex ``i``
    has variance ``dt``.
    """
    if not dt > 0:
        raise ContractViolation(f"dt must be positive, got {dt}")
    Z = stream.fine_blocks(grid, step * stream.substeps, stream.substeps)
    edge, vertex = aggregate(grid, model, dt, stream, Z)
    return NoiseIncrement(edge, vertex, float(dt), stream.path, step)
