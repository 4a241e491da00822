"""Convergence harnesses: deterministic space/time studies and coupled-noise strong studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import assemble
from .errors import ConfigurationError, NumericalError
from .noise import NoiseStream, aggregate, normal_block
from .solver import Stepper, _initial_vector


@dataclass
class ConvergenceResult:
    """Errors per level; ``sizes`` are ``h`` (space) or ``dt`` (time), coarse to fine."""

    mode: str
    sizes: np.ndarray
    errors: np.ndarray
    order: float

    @property
    def pairwise_orders(self):
        return np.log(self.errors[:-1] / self.errors[1:]) / np.log(self.sizes[:-1] / self.sizes[1:])

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.errors) < 0))

    def to_dict(self):
        return {
            "mode": self.mode,
            "sizes": self.sizes.tolist(),
            "errors": self.errors.tolist(),
            "pairwise_orders": self.pairwise_orders.tolist(),
            "order": self.order,
        }


def fitted_order(sizes, errors):
    """Least-squares slope of ``log(error)`` against ``log(size)``."""
    sizes, errors = np.asarray(sizes, float), np.asarray(errors, float)
    if np.any(errors <= 0):
        return float("nan")
    return float(np.polyfit(np.log(sizes), np.log(errors), 1)[0])


def restrict(fine, coarse, U):
    """Values of the fine nodal vector ``U`` at the nodes of the coarse layout."""
    out = np.empty(coarse.dim)
    for j in range(coarse.m):
        ratio, rem = divmod(fine.cells[j], coarse.cells[j])
        if rem:
            raise ConfigurationError(f"fine grid ({fine.cells[j]} cells) does not refine {coarse.cells[j]}")
        k = np.arange(1, coarse.cells[j]) * ratio
        out[coarse.interior_indices(j)] = U[fine.offsets[j] + k - 1]
    out[coarse.vertex_slice] = U[fine.vertex_slice]
    return out


def _deterministic_run(model, N, dt, T, U0, scheme="linear-implicit"):
    op = assemble(model, N)
    stepper = Stepper(op, model, dt, scheme, noise=False)
    U = _initial_vector(U0, op.layout, model)
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise ConfigurationError(f"T={T} is not a multiple of dt={dt}")
    for i in range(n):
        U = stepper.advance(U, i * dt)
    if not np.all(np.isfinite(U)):
        raise NumericalError("deterministic run blew up")
    return op.layout, U


def space_study(model, U0, T, cells, N_ref, dt, scheme="linear-implicit"):
    """Max-norm error at ``T`` against a fine-grid reference, same ``dt`` on every level.

    Sharing ``dt`` cancels the temporal error so the fitted order is spatial.
    Noise is switched off.
    """
    ref_grid, ref = _deterministic_run(model, N_ref, dt, T, U0, scheme)
    errs, hs = [], []
    for N in cells:
        grid, U = _deterministic_run(model, N, dt, T, U0, scheme)
        errs.append(np.abs(U - restrict(ref_grid, grid, ref)).max())
        hs.append(1.0 / N)
    hs, errs = np.array(hs), np.array(errs)
    return ConvergenceResult("space", hs, errs, fitted_order(hs, errs))


def time_study(model, U0, T, dts, dt_ref, N, scheme="linear-implicit"):
    """Max-norm error at ``T`` against a small-step reference on one grid."""
    _, ref = _deterministic_run(model, N, dt_ref, T, U0, scheme)
    errs = [np.abs(_deterministic_run(model, N, dt, T, U0, scheme)[1] - ref).max() for dt in dts]
    dts, errs = np.array(dts, float), np.array(errs)
    return ConvergenceResult("time", dts, errs, fitted_order(dts, errs))


def coupled_refinement_run(config, model, levels, U0=None, ref_refine=4, op=None):
    """Strong errors of dyadic step sizes ``config.dt / 2**l``, ``l < levels``.

    All levels and the reference (step ``dt / 2**(levels-1) / ref_refine``)
    aggregate the same fine Brownian increments, path by path.  The error is
    the path mean of ``||X_l(T) - X_ref(T)||_mass``; ``order`` is the fitted
    slope against ``dt``.
    """
    if levels < 3:
        raise ConfigurationError("a strong study needs at least 3 levels")
    op = op if op is not None else assemble(model, config.N)
    grid = op.layout
    n_coarse = config.n_steps
    sub_ref = 2 ** (levels - 1) * ref_refine
    dt_ref = config.dt / sub_ref
    level_sub = [sub_ref // 2**l for l in range(levels)]
    paths = np.arange(config.paths)
    steppers = [Stepper(op, model, dt_ref * s, config.scheme, taming=config.taming) for s in level_sub]
    ref_stepper = Stepper(op, model, dt_ref, config.scheme, taming=config.taming)
    U_init = np.repeat(_initial_vector(U0, grid, model)[:, None], len(paths), axis=1)
    states = [U_init.copy() for _ in level_sub]
    ref = U_init.copy()
    size = NoiseStream(config.seed).block_size(grid)
    for n in range(n_coarse):
        Z = np.empty((len(paths), sub_ref, size))
        for a, p in enumerate(paths):
            for s in range(sub_ref):
                Z[a, s] = normal_block(config.seed, int(p), n * sub_ref + s, size)
        for s in range(sub_ref):
            dW = _increment(grid, model, dt_ref, Z[:, s: s + 1])
            ref = ref_stepper.advance(ref, (n * sub_ref + s) * dt_ref, dW)
        for li, r in enumerate(level_sub):
            for b in range(sub_ref // r):
                dW = _increment(grid, model, dt_ref * r, Z[:, b * r: (b + 1) * r])
                t = (n * sub_ref + b * r) * dt_ref
                states[li] = steppers[li].advance(states[li], t, dW)
    if not np.all(np.isfinite(ref)):
        raise NumericalError("reference level blew up")
    mass = op.mass[:, None]
    errs = np.array([np.sqrt((mass * (S - ref) ** 2).sum(axis=0)).mean() for S in states])
    dts = config.dt / 2.0 ** np.arange(levels)
    return ConvergenceResult("strong", dts, errs, fitted_order(dts, errs))


def _increment(grid, model, dt, Z):
    edge, vertex = aggregate(grid, model, dt, NoiseStream(0, substeps=Z.shape[1]), Z)
    return np.concatenate([edge, vertex], axis=1).T


@dataclass
class RepeatedSeedResult:
    results: list

    @property
    def monotone_fraction(self):
        return float(np.mean([r.monotone for r in self.results]))

    @property
    def orders(self):
        return np.array([r.order for r in self.results])


def repeated_seed_study(config, model, levels, seeds, U0=None, ref_refine=4):
    op = assemble(model, config.N)
    return RepeatedSeedResult(
        [coupled_refinement_run(config.replace(seed=s), model, levels, U0, ref_refine, op) for s in seeds]
    )

