"""Spectral calculus for the discrete generator and semigroup certificates.

The generator ``A_h = -mass^{-1} K_h`` is self-adjoint in the mass inner
product, so the symmetric-definite pencil ``K_h phi = lam mass phi`` gives
``exp(t A_h) = Phi diag(exp(-lam t)) Phi^T mass``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ContractViolation, NumericalError

POSITIVITY_ATOL = 1e-10
CONTRACTION_RTOL = 1e-10
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class SpectralFactorization:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray
    residual: float

    @property
    def dim(self):
        return self.eigenvalues.size

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    def _spectral(self, weights):
        """Dense nodal matrix ``Phi diag(weights) Phi^T mass``."""
        Phi = self.eigenvectors
        return (Phi * weights) @ (Phi.T * self.mass)

    def semigroup_matrix(self, t):
        if t < 0:
            raise ContractViolation(f"semigroup time must be nonnegative, got {t}")
        return self._spectral(np.exp(-self.eigenvalues * t))

    def generator_semigroup_matrix(self, t):
        """``A_h exp(t A_h)``."""
        lam = self.eigenvalues
        return self._spectral(-lam * np.exp(-lam * t))


def factorize(op):
    """Mass-orthonormal eigenpairs of the stiffness/mass pencil, ascending.

    Each eigenvector is normalized so that its first entry of magnitude above
    ``1e-12`` of its max is positive.
    """
    K = op.stiffness.toarray()
    mass = np.asarray(op.mass, dtype=float)
    try:
        lam, Phi = linalg.eigh(K, np.diag(mass))
    except linalg.LinAlgError as exc:
        raise NumericalError(f"generalized eigensolver failed: {exc}") from exc
    for col in range(Phi.shape[1]):
        v = Phi[:, col]
        first = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
        if v[first] < 0:
            Phi[:, col] = -v
    scale = max(np.abs(K).sum(axis=1).max(), 1.0)
    residual = float(np.abs(K @ Phi - (mass[:, None] * Phi) * lam).max())
    if residual > RESIDUAL_RTOL * scale:
        raise NumericalError(f"eigen-residual {residual:.3e} exceeds {RESIDUAL_RTOL:g} * ||K||")
    lam.setflags(write=False)
    Phi.setflags(write=False)
    return SpectralFactorization(lam, Phi, mass, residual)


def expm_apply(fact, t, v):
    """``exp(t A_h) v`` for ``t >= 0``; ``v`` may hold several columns."""
    if t < 0:
        raise ContractViolation(f"semigroup time must be nonnegative, got {t}")
    v = np.asarray(v, dtype=float)
    w = np.exp(-fact.eigenvalues * t)
    mass = fact.mass if v.ndim == 1 else fact.mass[:, None]
    coeff = fact.eigenvectors.T @ (mass * v)
    coeff = coeff * (w if v.ndim == 1 else w[:, None])
    return fact.eigenvectors @ coeff


def mass_norm(fact_or_mass, v):
    mass = getattr(fact_or_mass, "mass", fact_or_mass)
    return float(np.sqrt(np.sum(mass * np.asarray(v) ** 2)))


@dataclass
class SubMarkovEntry:
    t: float
    min_entry: float
    max_image_of_ones: float
    max_vertex_image: float
    ok: bool


@dataclass
class SubMarkovReport:
    entries: list = field(default_factory=list)

    @property
    def ok(self):
        return all(e.ok for e in self.entries)

    @property
    def min_entry(self):
        return min(e.min_entry for e in self.entries)

    @property
    def max_row_image_of_ones(self):
        return max(e.max_image_of_ones for e in self.entries)


def check_submarkov(fact, t_list, n_vertices=None):
    """Positivity and sup-norm contractivity of ``exp(t A_h)`` in nodal coordinates.

    ``n_vertices`` (the trailing block of the layout) enables the separate
    vertex report; without it the vertex column repeats the global maximum.
    """
    report = SubMarkovReport()
    for t in t_list:
        S = fact.semigroup_matrix(float(t))
        ones = S.sum(axis=1)
        vmax = float(ones[-n_vertices:].max()) if n_vertices else float(ones.max())
        lo = float(S.min())
        hi = float(ones.max())
        report.entries.append(
            SubMarkovEntry(float(t), lo, hi, vmax, lo >= -POSITIVITY_ATOL and hi <= 1.0 + CONTRACTION_RTOL)
        )
    return report


@dataclass
class AnalyticityReport:
    times: np.ndarray
    values: np.ndarray

    @property
    def supremum(self):
        return float(self.values.max())

    @property
    def argmax(self):
        return float(self.times[int(np.argmax(self.values))])

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.values)))


def default_times(fact, decades=3.0, points=61):
    """Log-spaced times from the mesh cutoff ``1/lambda_max`` over ``decades`` decades."""
    t0 = 1.0 / fact.lambda_max
    return np.logspace(np.log10(t0), np.log10(t0) + decades, points)


def check_analyticity(fact, t_list=None):
    """``t * ||A_h exp(t A_h)||_inf`` (max row sum) over ``t_list``."""
    times = default_times(fact) if t_list is None else np.asarray(t_list, dtype=float)
    if np.any(times <= 0):
        raise ContractViolation("analyticity times must be positive")
    vals = np.array([t * np.abs(fact.generator_semigroup_matrix(t)).sum(axis=1).max() for t in times])
    return AnalyticityReport(times, vals)
