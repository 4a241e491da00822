"""The invariant suite behind ``netspde verify``.

Each check reports the measured quantity, the threshold it is held to and a
margin (positive when the check passes with room to spare).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import assemble, kirchhoff_residual
from .dynamics import GROWTH_MARGIN, validate_dissipativity, validate_growth
from .graph import SYMMETRY_RTOL, validate_vertex_matrix
from .semigroup import CONTRACTION_RTOL, POSITIVITY_ATOL, check_analyticity, check_submarkov, factorize

SUBMARKOV_TIMES = (0.01, 0.1, 1.0)
DISSIPATIVITY_RADII = (1.0, 10.0, 100.0)
KIRCHHOFF_CONSTANT_ATOL = 1e-12
# The Kirchhoff rate is first order but reaches 1 from below when c varies.
KIRCHHOFF_ORDER_TOL = 0.05


@dataclass
class Check:
    name: str
    ok: bool
    value: float
    threshold: float
    margin: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        text = f"{status}  {self.name:<28} value={self.value:.6g}  threshold={self.threshold:.6g}  margin={self.margin:+.3e}"
        return text + (f"  ({self.detail})" if self.detail else "")


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def lines(self):
        return [c.line() for c in self.checks]

    def to_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "ok": c.ok, "value": float(c.value), "threshold": float(c.threshold),
                 "margin": float(c.margin), "detail": c.detail}
                for c in self.checks
            ],
        }


def _upper(name, value, threshold, detail=""):
    return Check(name, bool(value <= threshold), float(value), float(threshold), float(threshold - value), detail)


def _lower(name, value, threshold, detail="", strict=False):
    ok = value > threshold if strict else value >= threshold
    return Check(name, bool(ok), float(value), float(threshold), float(value - threshold), detail)


def quadratic_test_profile(model):
    """Continuous piecewise-quadratic data: affine interpolation of vertex values plus an edge bubble."""
    r = 1.0 + 0.5 * np.arange(model.n_vertices) / model.n_vertices
    prof = []
    for j, e in enumerate(model.edges):
        a, b = r[e.tail], r[e.head]
        beta = 1.0 + 0.25 * j
        prof.append([a, b - a + beta, -beta])
    return prof


def kirchhoff_study(model, cells=(8, 16, 32), profile=None):
    """Max vertex residuals and pairwise observed orders under mesh doubling."""
    profile = quadratic_test_profile(model) if profile is None else profile
    res = np.array([np.abs(kirchhoff_residual(assemble(model, N), profile)).max() for N in cells])
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log2(res[:-1] / res[1:])
    return res, orders


def run_suite(model, N=16):
    """Run every invariant check on ``model`` discretized with ``N`` cells per edge."""
    rep = VerifyReport()
    vm = validate_vertex_matrix(model.M)
    rows = np.asarray(model.M).sum(axis=1)
    rep.checks.append(Check("graph validation", vm.ok, float(rows.max()), 0.0, float(-rows.max()),
                            "max row sum of M; connectivity and coefficients checked at construction"))

    op = assemble(model, N)
    K = op.stiffness
    norm = float(abs(K).sum(axis=1).max())
    asym = float(abs(K - K.T).sum(axis=1).max())
    rep.checks.append(_upper("form symmetry", asym, SYMMETRY_RTOL * norm, "||K - K^T||_inf"))

    fact = factorize(op)
    rep.checks.append(_lower("coercivity", fact.lambda_min, 0.0, "smallest pencil eigenvalue", strict=True))

    sm = check_submarkov(fact, SUBMARKOV_TIMES, model.n_vertices)
    rep.checks.append(_lower("sub-Markov positivity", sm.min_entry, -POSITIVITY_ATOL, "min entry of exp(tA)"))
    rep.checks.append(
        _upper("sub-Markov contraction", sm.max_row_image_of_ones, 1.0 + CONTRACTION_RTOL, "max of exp(tA) 1")
    )

    an = check_analyticity(fact)
    rep.checks.append(
        Check("analyticity proxy", an.finite, an.supremum, float("inf"), float("inf") if an.finite else float("-inf"),
              f"sup t ||A exp(tA)||_inf at t={an.argmax:.3g}")
    )

    flat = np.ones(model.m)[:, None].tolist()
    if all(e.p.is_zero for e in model.edges):
        const = float(np.abs(kirchhoff_residual(op, flat)).max())
        rep.checks.append(_upper("Kirchhoff constant data", const, KIRCHHOFF_CONSTANT_ATOL))
    res, orders = kirchhoff_study(model, cells=(N, 2 * N, 4 * N))
    last = float(orders[-1]) if np.isfinite(orders[-1]) else float("inf")
    rep.checks.append(_lower("Kirchhoff order", last, 1.0 - KIRCHHOFF_ORDER_TOL,
                             f"residuals {', '.join(f'{v:.3g}' for v in res)}"))

    for R in DISSIPATIVITY_RADII:
        dr = validate_dissipativity(model, radius=R)
        rates = [e.b for e in dr.entries if not e.degenerate]
        b = min(rates) if rates else 0.0
        b = b if np.isfinite(b) else 0.0
        failed = [e.message for e in dr.entries if not e.ok]
        note = "degenerate (zero reaction)" if not rates else f"worst slack {dr.worst_slack:.3g}"
        rep.checks.append(Check(f"dissipativity R={R:g}", dr.ok, b, 0.0, b, "; ".join(failed) or note))

    gr = validate_growth(model)
    worst_slope = max(e.slope for e in gr.entries)
    limit = gr.exponent + GROWTH_MARGIN
    detail = "; ".join(e.message for e in gr.entries if not e.ok) or f"k/K = {gr.exponent:.4g}"
    rep.checks.append(Check("growth", gr.ok, worst_slope, limit, limit - worst_slope, detail))
    return rep
