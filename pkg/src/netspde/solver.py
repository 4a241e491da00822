"""Time stepping of the full stochastic system and Monte Carlo moments.

Three schemes share the nodal drift ``D_h U + F(t, U)`` and the diagonal
noise ``Gamma(t, U) dW``:

``linear-implicit``
    ``(mass + dt K_h) U+ = mass (U + dt (D_h U + F) + Gamma dW)``
``exponential``
    ``U+ = exp(dt A_h) (U + dt (D_h U + F) + Gamma dW)``
``tamed-explicit``
    ``U+ = U + dt (A_h U + D_h U + F_tau) + Gamma dW``

with ``F_tau = F / (1 + dt |F|)`` per node when taming is on (default only
for the explicit scheme).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .discretization import assemble
from .dynamics import DiffusionField, ReactionField
from .errors import ConfigurationError, ContractViolation, NumericalError, SimulationBlowUp
from .noise import NoiseStream, aggregate, normal_block
from .profiles import CoefficientProfile
from .semigroup import factorize

SCHEMES = ("linear-implicit", "exponential", "tamed-explicit")
BLOWUP_QUOTA = 0.01
_BATCH = 64


@dataclass(frozen=True)
class SolverConfig:
    T: float = 1.0
    dt: float = 0.01
    scheme: str = "linear-implicit"
    N: object = 16
    paths: int = 1
    q: float = 6.0
    seed: int = 0
    save_every: int = 1
    taming: bool | None = None

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0 and self.dt <= self.T * (1 + 1e-12)):
            raise ConfigurationError(f"need T > 0 and 0 < dt <= T (T={self.T}, dt={self.dt})")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; choose one of {', '.join(SCHEMES)}")
        if int(self.paths) != self.paths or self.paths < 1:
            raise ConfigurationError(f"paths must be a positive integer (got {self.paths})")
        if int(self.save_every) != self.save_every or self.save_every < 1:
            raise ConfigurationError("save_every must be a positive integer")
        if not self.q > 0:
            raise ConfigurationError("moment order q must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must fit in 64 bits")

    @property
    def n_steps(self):
        n = int(round(self.T / self.dt))
        if abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise ConfigurationError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        return n

    @property
    def tamed(self):
        return self.scheme == "tamed-explicit" if self.taming is None else bool(self.taming)

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class InitialCondition:
    """Initial data: per-edge profiles and/or vertex values, or one constant.

    Vertex values default to the edge profiles' endpoint values, which must
    then agree at every vertex.
    """

    constant: float | None = 0.0
    edges: tuple | None = None
    vertices: tuple | None = None

    def vector(self, grid, model=None):
        if self.edges is None and self.vertices is None:
            return np.full(grid.dim, float(self.constant or 0.0))
        U = np.full(grid.dim, float(self.constant or 0.0))
        ends = [[] for _ in range(grid.n_vertices)]
        if self.edges is not None:
            if len(self.edges) != grid.m:
                raise ConfigurationError(f"initial condition lists {len(self.edges)} edge profiles for {grid.m} edges")
            for j, prof in enumerate(self.edges):
                prof = CoefficientProfile.coerce(prof)
                U[grid.interior_indices(j)] = prof(grid.interior_positions(j))
                ends[grid.tails[j]].append(float(prof(0.0)))
                ends[grid.heads[j]].append(float(prof(1.0)))
        if self.vertices is not None:
            if len(self.vertices) != grid.n_vertices:
                raise ConfigurationError("initial vertex values must list one value per vertex")
            U[grid.vertex_slice] = np.asarray(self.vertices, dtype=float)
        else:
            for i, vals in enumerate(ends):
                if vals and max(vals) - min(vals) > 1e-12 * (1 + max(map(abs, vals))):
                    raise ConfigurationError(f"initial edge profiles disagree at vertex {i + 1}: {vals}")
                if vals:
                    U[grid.vertex_index(i)] = vals[0]
        return U

    def to_dict(self):
        d = {}
        if self.constant:
            d["constant"] = self.constant
        if self.edges is not None:
            d["edges"] = [CoefficientProfile.coerce(p).to_dict() for p in self.edges]
        if self.vertices is not None:
            d["vertices"] = list(self.vertices)
        return d


class Stepper:
    """One scheme prepared for fixed ``(operator, dt)``; states are ``(dim,)`` or ``(dim, paths)``."""

    def __init__(self, op, model, dt, scheme="linear-implicit", fact=None, taming=None, noise=True):
        if scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {scheme!r}")
        self.op, self.model, self.dt, self.scheme = op, model, float(dt), scheme
        self.tamed = scheme == "tamed-explicit" if taming is None else bool(taming)
        self.reaction = ReactionField(model, op.layout)
        self.diffusion = DiffusionField(model, op.layout)
        self.noise = noise and not self.diffusion.is_zero
        self._has_drift1 = op.drift1.nnz > 0
        self.mass = np.asarray(op.mass)
        if scheme == "linear-implicit":
            lhs = sp.diags(self.mass) + self.dt * op.stiffness
            self._lu = splu(lhs.tocsc())
        elif scheme == "exponential":
            fact = fact if fact is not None else factorize(op)
            self._E = fact.semigroup_matrix(self.dt)

    def _col(self, a, U):
        return a if U.ndim == 1 else a[:, None]

    def drift(self, t, U):
        F = self.reaction(t, U)
        if self.tamed:
            F = F / (1.0 + self.dt * np.abs(F))
        if self._has_drift1:
            F = F + self.op.drift1 @ U
        return F

    def advance(self, U, t, dW=None):
        """Return the state after one step from ``(t, U)`` driven by the nodal increment ``dW``."""
        U = np.asarray(U, dtype=float)
        if U.shape[0] != self.op.dim:
            raise ContractViolation(f"state length {U.shape[0]} does not match operator dimension {self.op.dim}")
        incr = self.dt * self.drift(t, U)
        if self.noise and dW is not None:
            incr = incr + self.diffusion.coefficients(t, U) * dW
        if self.scheme == "linear-implicit":
            rhs = self._col(self.mass, U) * (U + incr)
            return self._lu.solve(rhs)
        if self.scheme == "exponential":
            return self._E @ (U + incr)
        AU = -(self.op.stiffness @ U) / self._col(self.mass, U)
        return U + self.dt * AU + incr


def step(op, fact, model, U, t, dt, dW, scheme="linear-implicit", taming=None):
    """One step of ``scheme`` (convenience wrapper; loops should reuse a :class:`Stepper`)."""
    dW = dW.as_state() if hasattr(dW, "as_state") else dW
    out = Stepper(op, model, dt, scheme, fact=fact, taming=taming).advance(U, t, dW)
    if not np.all(np.isfinite(out)):
        raise SimulationBlowUp(t + dt)
    return out


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    path: int = 0
    completed: bool = True
    blowup_time: float | None = None

    @property
    def status(self):
        return "completed" if self.completed else f"blew-up at t={self.blowup_time:.6g}"


def _initial_vector(U0, grid, model):
    if U0 is None:
        return np.zeros(grid.dim)
    if isinstance(U0, InitialCondition):
        return U0.vector(grid, model)
    U0 = np.asarray(U0, dtype=float)
    if U0.shape != (grid.dim,):
        raise ContractViolation(f"initial state must have shape ({grid.dim},), got {U0.shape}")
    return U0


def _batch_noise(stream_args, grid, model, dt, paths, step, substeps=1, base_cells=None):
    seed = stream_args
    probe = NoiseStream(seed, 0, base_cells, substeps)
    size = probe.block_size(grid)
    Z = np.empty((len(paths), substeps, size))
    for a, p in enumerate(paths):
        for s in range(substeps):
            Z[a, s] = normal_block(seed, p, step * substeps + s, size)
    edge, vertex = aggregate(grid, model, dt, probe, Z)
    return np.concatenate([edge, vertex], axis=1).T


def _run_batch(config, model, op, fact, paths, U0, keep_states=True, noise=True):
    """Advance a batch of independent paths together.

    Returns ``(times, states or None, sup_norms, blowup_times)`` where
    ``states`` has shape ``(snapshots, dim, paths)``.
    """
    grid = op.layout
    stepper = Stepper(op, model, config.dt, config.scheme, fact=fact, taming=config.taming, noise=noise)
    n_steps = config.n_steps
    P = len(paths)
    U = np.repeat(_initial_vector(U0, grid, model)[:, None], P, axis=1)
    alive = np.ones(P, dtype=bool)
    blowups = np.full(P, np.nan)
    times = [0.0]
    snaps = [U.copy()] if keep_states else None
    sup = np.abs(U).max(axis=0)
    for n in range(n_steps):
        t = n * config.dt
        dW = _batch_noise(config.seed, grid, model, config.dt, paths, n) if stepper.noise else None
        with np.errstate(all="ignore"):
            try:
                U_new = stepper.advance(U, t, dW)
            except SimulationBlowUp:
                U_new = np.full_like(U, np.nan)
        bad = alive & ~np.all(np.isfinite(U_new), axis=0)
        if bad.any():
            blowups[bad] = t + config.dt
            alive &= ~bad
        U_new[:, ~alive] = 0.0
        U = U_new
        if (n + 1) % config.save_every == 0 or n + 1 == n_steps:
            times.append((n + 1) * config.dt)
            sup = np.where(alive, np.maximum(sup, np.abs(U).max(axis=0)), sup)
            if keep_states:
                snap = U.copy()
                snap[:, ~alive] = np.nan
                snaps.append(snap)
    states = np.stack(snaps) if keep_states else None
    return np.array(times), states, sup, blowups


def _prepare(config, model, op, fact):
    op = op if op is not None else assemble(model, config.N)
    if config.scheme == "exponential" and fact is None:
        fact = factorize(op)
    return op, fact


def simulate_paths(config, model, op=None, fact=None, paths=None, U0=None, noise=True):
    """Trajectories of several paths (default ``range(config.paths)``)."""
    op, fact = _prepare(config, model, op, fact)
    paths = list(range(config.paths)) if paths is None else list(paths)
    out = []
    for start in range(0, len(paths), _BATCH):
        chunk = paths[start: start + _BATCH]
        times, states, _, blow = _run_batch(config, model, op, fact, chunk, U0, noise=noise)
        for a, p in enumerate(chunk):
            ok = not np.isfinite(blow[a])
            S = states[:, :, a]
            if not ok:
                S = S[np.all(np.isfinite(S), axis=1)]
            out.append(Trajectory(times[: S.shape[0]], S, p, ok, None if ok else float(blow[a])))
    return out


def simulate_path(config, model, op=None, fact=None, path=0, U0=None, noise=True):
    """One path from ``t = 0`` to ``T``, snapshots every ``save_every`` steps.

    Deterministic in ``(config.seed, path)``.  Blow-up ends the trajectory and
    is recorded in the result instead of being raised.
    """
    return simulate_paths(config, model, op, fact, [path], U0, noise)[0]


@dataclass
class MomentStats:
    """Monte Carlo estimate of ``E sup_t ||X(t)||_inf^q``."""

    estimate: float
    stderr: float
    paths: int
    blowups: int
    q: float
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def blowup_fraction(self):
        return self.blowups / self.paths

    def to_dict(self):
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "paths": self.paths,
            "blowups": self.blowups,
            "blowup_fraction": self.blowup_fraction,
            "q": self.q,
        }


def moment_stats(sups, blow, q):
    ok = ~np.isfinite(blow)
    vals = sups[ok] ** q
    n = vals.size
    est = float(vals.mean()) if n else float("nan")
    se = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return MomentStats(est, se, int(sups.size), int((~ok).sum()), float(q), vals)


def monte_carlo(config, model, U0=None, op=None, fact=None, noise=True):
    """Estimate ``E sup_t ||X(t)||_inf^q`` over ``config.paths`` independent paths.

    The sup runs over saved snapshots.  Paths that blow up are excluded and
    counted; more than 1% of them (or all) raises :class:`NumericalError`.
    """
    if config.paths < 2:
        raise ConfigurationError("Monte Carlo needs at least 2 paths")
    op, fact = _prepare(config, model, op, fact)
    sups, blows = [], []
    paths = list(range(config.paths))
    for start in range(0, len(paths), _BATCH):
        chunk = paths[start: start + _BATCH]
        _, _, sup, blow = _run_batch(config, model, op, fact, chunk, U0, keep_states=False, noise=noise)
        sups.append(sup)
        blows.append(blow)
    stats = moment_stats(np.concatenate(sups), np.concatenate(blows), config.q)
    if stats.blowups == stats.paths:
        raise NumericalError("all Monte Carlo paths blew up")
    if stats.blowup_fraction > BLOWUP_QUOTA:
        raise NumericalError(
            f"{stats.blowups} of {stats.paths} paths blew up (more than {BLOWUP_QUOTA:.0%})"
        )
    return stats
