"""Reaction nonlinearities, noise coefficients and their hypothesis checks.

Reactions are odd-degree polynomials in the state with a negative leading
term, ``f(t, x, eta) = -a(t, x) eta**(2k+1) + sum_l a_l(t, x) eta**l``, lifted
pointwise to the nodal state.  Noise coefficients act diagonally: ``h_j`` on
edge nodes, ``g_i`` on vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .errors import ContractViolation, ModelValidationError, SimulationBlowUp
from .profiles import CoefficientProfile, DENSE_SAMPLES

_TIME_SAMPLES = 33


def _modulation_values(mod, t):
    if mod is None:
        return 1.0
    return mod(np.asarray(t, dtype=float))


# ---------------------------------------------------------------------------
# reaction specs


@dataclass(frozen=True)
class ZeroReaction:
    kind = "zero"

    @property
    def k(self):
        return 0

    def coefficients(self, x, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.zeros((x.size, 2))

    def check(self, t_max=1.0):
        return []

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class FHNReaction:
    """FitzHugh-Nagumo cubic ``eta (eta - 1) (a - eta)`` with ``0 < a < 1``."""

    a: float
    kind = "fhn"

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ModelValidationError(f"FHN parameter a={self.a} must lie in (0, 1)")

    @property
    def k(self):
        return 1

    def coefficients(self, x, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        row = np.array([0.0, -self.a, 1.0 + self.a, -1.0])
        return np.tile(row, (x.size, 1))

    def check(self, t_max=1.0):
        return []

    def to_dict(self):
        return {"kind": "fhn", "a": self.a}


@dataclass(frozen=True)
class PolynomialReaction:
    """General odd-degree polynomial reaction.

    ``leading`` is the profile ``a_j(x)`` (the reaction carries ``-a_j``),
    ``lower`` the ``2k+1`` profiles ``a_{j,l}``.  Optional time modulations
    are profiles in ``t`` multiplying the corresponding coefficient.
    ``bounds=(c, C)`` declares the uniform bounds that :meth:`check` enforces.
    """

    k: int
    leading: CoefficientProfile
    lower: tuple
    leading_modulation: CoefficientProfile | None = None
    lower_modulation: tuple | None = None
    bounds: tuple | None = None
    kind = "polynomial"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ModelValidationError(f"polynomial degree index k={self.k} must be a nonnegative integer")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "leading", CoefficientProfile.coerce(self.leading))
        lower = tuple(CoefficientProfile.coerce(p) for p in self.lower)
        if len(lower) != 2 * self.k + 1:
            raise ModelValidationError(
                f"polynomial reaction with k={self.k} needs {2 * self.k + 1} lower coefficients, got {len(lower)}"
            )
        object.__setattr__(self, "lower", lower)
        if self.lower_modulation is not None:
            mods = tuple(None if m is None else CoefficientProfile.coerce(m) for m in self.lower_modulation)
            if len(mods) != len(lower):
                raise ModelValidationError("lower_modulation must match the number of lower coefficients")
            object.__setattr__(self, "lower_modulation", mods)
        if self.leading_modulation is not None:
            object.__setattr__(self, "leading_modulation", CoefficientProfile.coerce(self.leading_modulation))

    @property
    def degree(self):
        return 2 * self.k + 1

    def coefficients(self, x, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        out = np.empty((x.size, self.degree + 1))
        mods = self.lower_modulation or (None,) * len(self.lower)
        for l, (prof, mod) in enumerate(zip(self.lower, mods)):
            out[:, l] = prof(x) * _modulation_values(mod, t)
        out[:, -1] = -self.leading(x) * _modulation_values(self.leading_modulation, t)
        return out

    def check(self, t_max=1.0):
        """Pointwise bound violations on a dense (t, x) sample."""
        x = np.linspace(0.0, 1.0, DENSE_SAMPLES)
        ts = np.linspace(0.0, t_max, _TIME_SAMPLES)
        X, T = np.meshgrid(x, ts)
        coef = self.coefficients(X.ravel(), T.ravel())
        lead = -coef[:, -1]
        problems = []
        lo = float(lead.min())
        if not lo > 0.0:
            problems.append(f"leading coefficient a_j must be strictly positive (min {lo:.6g})")
        if self.bounds is not None:
            c, C = self.bounds
            if lo < c or lead.max() > C:
                problems.append(f"leading coefficient outside declared bounds [{c}, {C}]")
            if np.abs(coef[:, :-1]).max() > C:
                problems.append(f"lower coefficient exceeds declared bound {C}")
        return problems

    def to_dict(self):
        d = {
            "kind": "polynomial",
            "k": self.k,
            "leading": self.leading.to_dict(),
            "lower": [p.to_dict() for p in self.lower],
        }
        if self.leading_modulation is not None:
            d["leading_modulation"] = self.leading_modulation.to_dict()
        if self.lower_modulation is not None:
            d["lower_modulation"] = [None if m is None else m.to_dict() for m in self.lower_modulation]
        if self.bounds is not None:
            d["bounds"] = list(self.bounds)
        return d


def reaction_value(spec, x, eta, t=0.0):
    """Evaluate one reaction pointwise (``x`` and ``eta`` broadcast)."""
    eta = np.asarray(eta, dtype=float)
    x = np.broadcast_to(np.asarray(x, dtype=float), eta.shape)
    coef = spec.coefficients(x.ravel(), np.broadcast_to(t, eta.shape).ravel())
    return _horner(coef, eta.ravel()).reshape(eta.shape)


def _horner(coef, eta):
    out = np.zeros_like(eta, dtype=float)
    for l in range(coef.shape[1] - 1, -1, -1):
        out = out * eta + coef[:, l]
    return out


# ---------------------------------------------------------------------------
# noise coefficient specs


@dataclass(frozen=True)
class AdditiveNoise:
    """Constant noise coefficient ``sigma``."""

    sigma: float
    kind = "additive"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ModelValidationError(f"noise sigma={self.sigma} must be nonnegative")

    def __call__(self, eta, exponent=1.0, t=0.0):
        return np.full_like(np.asarray(eta, dtype=float), self.sigma)

    @property
    def is_zero(self):
        return self.sigma == 0.0

    def to_dict(self):
        return {"kind": "additive", "sigma": self.sigma}


@dataclass(frozen=True)
class BoundedMultiplicativeNoise:
    """``sigma (1 + |eta|)**(k/K)`` with ``|eta|`` capped at ``saturation``.

    ``saturation=None`` leaves the coefficient uncapped, i.e. growth at
    exactly the permitted exponent.
    """

    sigma: float
    saturation: float | None = None
    kind = "bounded_mult"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ModelValidationError(f"noise sigma={self.sigma} must be nonnegative")
        if self.saturation is not None and not self.saturation > 0:
            raise ModelValidationError(f"noise saturation={self.saturation} must be positive")

    def __call__(self, eta, exponent=1.0, t=0.0):
        a = np.abs(np.asarray(eta, dtype=float))
        if self.saturation is not None:
            a = np.minimum(a, self.saturation)
        return self.sigma * (1.0 + a) ** exponent

    @property
    def is_zero(self):
        return self.sigma == 0.0

    def to_dict(self):
        d = {"kind": "bounded_mult", "sigma": self.sigma}
        if self.saturation is not None:
            d["saturation"] = self.saturation
        return d


@dataclass(frozen=True)
class PolynomialNoise:
    """Polynomial coefficient in ``eta`` (lowest degree first), optionally clipped to ``[-cap, cap]``."""

    coeffs: tuple
    cap: float | None = None
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ModelValidationError("polynomial noise needs at least one coefficient")
        if self.cap is not None and not self.cap > 0:
            raise ModelValidationError(f"noise cap={self.cap} must be positive")

    def __call__(self, eta, exponent=1.0, t=0.0):
        v = np.polynomial.polynomial.polyval(np.asarray(eta, dtype=float), self.coeffs)
        if self.cap is not None:
            v = np.clip(v, -self.cap, self.cap)
        return v

    @property
    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs)

    def to_dict(self):
        d = {"kind": "polynomial", "coeffs": list(self.coeffs)}
        if self.cap is not None:
            d["cap"] = self.cap
        return d


# ---------------------------------------------------------------------------
# degree bookkeeping


class Degrees(NamedTuple):
    k: int
    K: int
    per_edge: tuple

    @property
    def exponent(self):
        """Permitted growth exponent ``k/K`` of the noise coefficients."""
        return self.k / self.K


def degrees(model):
    """Return ``(k, K, per-edge degrees 2 k_j + 1)``.

    >>> # edges with k_j = (1, 2, 1) give (k, K) = (3, 5)
    """
    ks = [e.reaction.k for e in model.edges]
    return Degrees(2 * min(ks) + 1, 2 * max(ks) + 1, tuple(2 * kj + 1 for kj in ks))


# ---------------------------------------------------------------------------
# nodal evaluation


class ReactionField:
    """Nodal reaction drift for a fixed grid; vertex components are zero."""

    def __init__(self, model, grid):
        self.grid = grid
        self.dim = grid.dim
        self._blocks = []
        self._time_dependent = False
        for j, edge in enumerate(model.edges):
            idx = grid.interior_indices(j)
            x = grid.interior_positions(j)
            spec = edge.reaction
            if isinstance(spec, ZeroReaction):
                continue
            dep = isinstance(spec, PolynomialReaction) and (
                spec.leading_modulation is not None or spec.lower_modulation is not None
            )
            self._time_dependent |= dep
            self._blocks.append((idx, x, spec, dep, spec.coefficients(x, 0.0)))

    def __call__(self, t, U):
        U = np.asarray(U, dtype=float)
        if U.shape[0] != self.dim:
            raise ContractViolation(f"state has length {U.shape[0]}, grid has dimension {self.dim}")
        if not np.all(np.isfinite(U)):
            raise SimulationBlowUp(t)
        out = np.zeros_like(U)
        for idx, x, spec, dep, coef in self._blocks:
            if dep:
                coef = spec.coefficients(x, t)
            u = U[idx]
            acc = np.zeros_like(u)
            for l in range(coef.shape[1] - 1, -1, -1):
                c = coef[:, l] if u.ndim == 1 else coef[:, l, None]
                acc = acc * u + c
            out[idx] = acc
        return out


def eval_reaction(model, grid, t, U):
    """Reaction drift at every node: ``f_j(t, x_k, U_k)`` inside edges, 0 at vertices."""
    return ReactionField(model, grid)(t, U)


class DiffusionField:
    """Diagonal noise coefficients ``h_j(U_k)`` on edge nodes and ``g_i(r_i)`` at vertices."""

    def __init__(self, model, grid):
        self.grid = grid
        self.dim = grid.dim
        self.exponent = degrees(model).exponent
        self._blocks = []
        for j, edge in enumerate(model.edges):
            if not edge.edge_noise.is_zero:
                self._blocks.append((grid.interior_indices(j), edge.edge_noise))
        for i, spec in enumerate(model.vertex_noise):
            if not spec.is_zero:
                self._blocks.append((np.array([grid.vertex_index(i)]), spec))

    @property
    def is_zero(self):
        return not self._blocks

    def coefficients(self, t, U):
        U = np.asarray(U, dtype=float)
        out = np.zeros_like(U)
        for idx, spec in self._blocks:
            out[idx] = spec(U[idx], self.exponent, t)
        return out


def eval_diffusion(model, grid, t, U, dW):
    """Stochastic increment ``Gamma(t, U) dW`` (diagonal action).

    ``dW`` may be a :class:`~netspde.noise.NoiseIncrement` or a flat array in
    the nodal layout.
    """
    dW = dW.as_state() if hasattr(dW, "as_state") else np.asarray(dW, dtype=float)
    U = np.asarray(U, dtype=float)
    if dW.shape != U.shape or U.shape[0] != grid.dim:
        raise ContractViolation(f"state {U.shape} and increment {dW.shape} do not match grid dimension {grid.dim}")
    return DiffusionField(model, grid).coefficients(t, U) * dW


# ---------------------------------------------------------------------------
# hypothesis validators


@dataclass
class EdgeDissipativity:
    edge: int
    degree: int
    ok: bool
    b: float
    a: float = float("nan")
    c: float = float("nan")
    worst_slack: float = float("nan")
    witness: tuple | None = None
    degenerate: bool = False
    message: str = ""


@dataclass
class DissipativityReport:
    radius: float
    entries: list = field(default_factory=list)

    @property
    def ok(self):
        return all(e.ok for e in self.entries)

    @property
    def worst_slack(self):
        vals = [e.worst_slack for e in self.entries if np.isfinite(e.worst_slack)]
        return min(vals) if vals else float("nan")


def _reaction_specs(target):
    if hasattr(target, "edges"):
        return [e.reaction for e in target.edges]
    if isinstance(target, (list, tuple)):
        return list(target)
    return [target]


def validate_dissipativity(target, samples=2000, radius=10.0, t_max=1.0, seed=0):
    """Empirically confirm the one-sided growth bound of each edge reaction.

    For every edge the bound
    ``[f(t, x, eta + zeta) - f(t, x, zeta)] sign(eta) <= a - b |eta|^n + c |zeta|^n``
    (``n = 2 k_j + 1``) is fitted on random samples with
    ``|eta|, |zeta| <= radius``.  The rate ``b`` is fixed at
    ``min a_j * 2**-n``, which the odd-power monotonicity inequality
    guarantees to be admissible; ``a, c >= 0`` are then the smallest values
    (in the sense of ``a + c``) satisfying every sample, found by linear
    programming.  A reaction whose leading coefficient is not strictly
    positive fails outright.

    ``target`` is a network model, a single reaction spec or a list of them.
    """
    if not radius > 0 or samples < 1:
        raise ContractViolation("radius must be positive and samples >= 1")
    rng = np.random.default_rng(seed)
    report = DissipativityReport(radius=float(radius))
    for j, spec in enumerate(_reaction_specs(target)):
        n = 2 * spec.k + 1
        if isinstance(spec, ZeroReaction):
            report.entries.append(
                EdgeDissipativity(j, n, True, b=0.0, a=0.0, c=0.0, worst_slack=0.0, degenerate=True,
                                  message="zero reaction: holds for any small b > 0")
            )
            continue
        problems = spec.check(t_max)
        if problems:
            report.entries.append(EdgeDissipativity(j, n, False, b=float("nan"), message="; ".join(problems)))
            continue

        eta = rng.uniform(-radius, radius, samples)
        zeta = rng.uniform(-radius, radius, samples)
        corners = np.array([-radius, -radius / 2, 0.0, radius / 2, radius])
        ce, cz = np.meshgrid(corners, corners)
        eta = np.concatenate([eta, ce.ravel()])
        zeta = np.concatenate([zeta, cz.ravel()])
        x = rng.uniform(0.0, 1.0, eta.size)
        t = rng.uniform(0.0, t_max, eta.size)
        gx, gt = np.meshgrid(np.linspace(0.0, 1.0, 129), np.linspace(0.0, t_max, _TIME_SAMPLES))
        lead_min = float(-spec.coefficients(gx.ravel(), gt.ravel())[:, -1].min())
        b = lead_min * 2.0 ** (-n)

        coef = spec.coefficients(x, t)
        lhs = (_horner(coef, eta + zeta) - _horner(coef, zeta)) * np.sign(eta)
        rhs_needed = lhs + b * np.abs(eta) ** n
        zeta_n = np.abs(zeta) ** n
        # a + c |zeta|^n >= lhs + b |eta|^n  <=>  -a - c |zeta|^n <= -(lhs + b |eta|^n)
        res = linprog(
            c=[1.0, 1.0],
            A_ub=np.column_stack([-np.ones_like(zeta_n), -zeta_n]),
            b_ub=-rhs_needed,
            bounds=[(0, None), (0, None)],
            method="highs",
        )
        if not res.success:
            report.entries.append(EdgeDissipativity(j, n, False, b=b, message=f"no fit: {res.message}"))
            continue
        a_fit, c_fit = (float(v) for v in res.x)
        slack = a_fit - b * np.abs(eta) ** n + c_fit * zeta_n - lhs
        w = int(np.argmin(slack))
        scale = 1.0 + float(np.abs(lhs).max())
        worst = float(slack[w])
        report.entries.append(
            EdgeDissipativity(
                j, n, worst >= -1e-9 * scale, b=b, a=a_fit, c=c_fit, worst_slack=worst,
                witness=(float(t[w]), float(x[w]), float(eta[w]), float(zeta[w])),
            )
        )
    return report


@dataclass
class GrowthEntry:
    location: str
    ok: bool
    slope: float
    constant: float
    lipschitz: tuple
    message: str = ""


@dataclass
class GrowthReport:
    exponent: float
    entries: list = field(default_factory=list)

    @property
    def ok(self):
        return all(e.ok for e in self.entries)


GROWTH_MARGIN = 0.01


def _check_growth(spec, exponent, eta_max, points):
    pos = np.logspace(-3, np.log10(eta_max), points)
    eta = np.concatenate([-pos[::-1], [0.0], pos])
    vals = np.abs(spec(eta, exponent))
    const = float(np.max(vals / (1.0 + np.abs(eta)) ** exponent))
    slope = 0.0
    for sgn in (-1.0, 1.0):
        hi, lo = sgn * eta_max, sgn * eta_max / 10.0
        vh, vl = float(np.abs(spec(np.array([hi]), exponent))[0]), float(np.abs(spec(np.array([lo]), exponent))[0])
        if vh == 0.0 and vl == 0.0:
            continue
        if vl == 0.0:
            slope = float("inf")
            continue
        s = np.log(vh / vl) / np.log((1.0 + eta_max) / (1.0 + eta_max / 10.0))
        slope = max(slope, float(s))
    lips = []
    for r in (1.0, 10.0, 100.0):
        g = np.linspace(-r, r, 4001)
        v = spec(g, exponent)
        lips.append(float(np.max(np.abs(np.diff(v)) / np.diff(g))))
    ok = slope <= exponent + GROWTH_MARGIN and all(np.isfinite(lips))
    return slope, const, tuple(lips), ok


def validate_growth(model, eta_max=1e6, points=200):
    """Check every noise coefficient against the growth exponent ``k/K``.

    The empirical exponent is the log-log slope of ``|coefficient|`` over the
    last decade below ``eta_max``; it must not exceed ``k/K + 0.01``.  Local
    Lipschitz constants are estimated by difference quotients on the balls of
    radius 1, 10 and 100.
    """
    exponent = degrees(model).exponent
    report = GrowthReport(exponent=exponent)
    specs = [(f"edge {j + 1}", e.edge_noise) for j, e in enumerate(model.edges)]
    specs += [(f"vertex {i + 1}", g) for i, g in enumerate(model.vertex_noise)]
    for loc, spec in specs:
        slope, const, lips, ok = _check_growth(spec, exponent, eta_max, points)
        msg = "" if ok else f"empirical growth exponent {slope:.4g} exceeds k/K = {exponent:.4g}"
        report.entries.append(GrowthEntry(loc, ok, slope, const, lips, msg))
    return report
