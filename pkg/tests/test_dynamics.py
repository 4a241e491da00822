import numpy as np
import pytest

from netspde import presets
from netspde.discretization import build_grid
from netspde.dynamics import (
    AdditiveNoise,
    BoundedMultiplicativeNoise,
    FHNReaction,
    PolynomialNoise,
    PolynomialReaction,
    ZeroReaction,
    degrees,
    eval_diffusion,
    eval_reaction,
    reaction_value,
    validate_dissipativity,
    validate_growth,
)
from netspde.errors import ContractViolation, ModelValidationError, SimulationBlowUp
from netspde.graph import EdgeSpec, NetworkModel
from netspde.noise import NoiseStream, sample_increment


def poly(k, lead=1.0, lower=None):
    return PolynomialReaction(k, lead, lower if lower is not None else [0.0] * (2 * k + 1))


def chain(reactions, **kw):
    n = len(reactions) + 1
    edges = tuple(EdgeSpec(j, j + 1, reaction=r, **kw) for j, r in enumerate(reactions))
    return NetworkModel(n, edges, -np.eye(n))


def test_degrees():
    assert degrees(chain([poly(1), poly(2), poly(1)]))[:2] == (3, 5)
    d = degrees(presets.fhn_star())
    assert d[:2] == (3, 3) and d.exponent == 1.0
    assert degrees(chain([poly(0)]))[:2] == (1, 1)
    assert degrees(chain([ZeroReaction()])).per_edge == (1,)


def test_fhn_values():
    f = FHNReaction(0.5)
    assert np.allclose(reaction_value(f, 0.3, [0.0, 0.5, 1.0]), 0.0)
    assert reaction_value(f, 0.3, 2.0) == pytest.approx(-3.0)
    assert reaction_value(poly(1), 0.0, 3.0) == pytest.approx(-27.0)
    with pytest.raises(ModelValidationError):
        FHNReaction(1.5)


def test_polynomial_lower_count():
    with pytest.raises(ModelValidationError):
        PolynomialReaction(1, 1.0, [0.0, 0.0])


def test_polynomial_x_dependence_and_modulation():
    spec = PolynomialReaction(0, [1.0, 1.0], [[0.0, 2.0]], leading_modulation=[1.0, 1.0])
    # f(t, x, eta) = -(1 + x)(1 + t) eta + 2x
    assert reaction_value(spec, 0.5, 2.0, t=1.0) == pytest.approx(-(1.5 * 2.0) * 2.0 + 1.0)


def test_odd_symmetry(rng):
    spec = PolynomialReaction(2, 1.7, [0.0] * 5)
    eta = rng.uniform(-5, 5, 200)
    assert np.array_equal(reaction_value(spec, 0.3, -eta), -reaction_value(spec, 0.3, eta))


def test_eval_reaction_vertex_zero_and_pointwise(star, rng):
    grid = build_grid(star, 6)
    U = rng.uniform(-3, 3, grid.dim)
    out = eval_reaction(star, grid, 0.0, U)
    assert not out[grid.vertex_slice].any()
    idx = grid.interior_indices(1)
    assert np.allclose(out[idx], U[idx] * (U[idx] - 1) * (0.3 - U[idx]))
    U[2] = np.inf
    with pytest.raises(SimulationBlowUp):
        eval_reaction(star, grid, 0.5, U)
    with pytest.raises(ContractViolation):
        eval_reaction(star, grid, 0.0, np.zeros(3))


def test_eval_diffusion(rng):
    m = presets.fhn_star(sigma=1.0)
    grid = build_grid(m, 4)
    dW = sample_increment(grid, m, 0.01, NoiseStream(3))
    U = rng.standard_normal(grid.dim)
    out = eval_diffusion(m, grid, 0.0, U, dW)
    assert np.array_equal(out[: grid.n_interior], dW.edge_part)
    assert not out[grid.vertex_slice].any()
    zero = presets.fhn_star()
    assert not eval_diffusion(zero, grid, 0.0, U, dW).any()


def test_eval_diffusion_linear_vertex_and_diagonal(rng):
    m = NetworkModel(2, (EdgeSpec(0, 1, reaction=FHNReaction(0.4), edge_noise=BoundedMultiplicativeNoise(1.0)),),
                     -np.eye(2), (PolynomialNoise((0.0, 1.0)),) * 2)
    grid = build_grid(m, 5)
    dW = rng.standard_normal(grid.dim)
    U = rng.standard_normal(grid.dim)
    base = eval_diffusion(m, grid, 0.0, U, dW)
    assert np.allclose(base[grid.vertex_slice], U[grid.vertex_slice] * dW[grid.vertex_slice])
    for k in range(grid.dim):
        V = U.copy()
        V[k] += 0.7
        changed = np.flatnonzero(eval_diffusion(m, grid, 0.0, V, dW) != base)
        assert set(changed) <= {k}


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("R", [1.0, 10.0, 100.0])
def test_dissipativity_fhn(a, R):
    rep = validate_dissipativity(FHNReaction(a), radius=R)
    assert rep.ok and rep.entries[0].b > 0


@pytest.mark.parametrize("R", [1.0, 10.0, 100.0])
def test_dissipativity_bounded_polynomials(R, rng):
    lower = [list(rng.uniform(-2, 2, 2)) for _ in range(5)]
    spec = PolynomialReaction(2, [1.0, 0.5], lower, bounds=(0.9, 5.0))
    assert validate_dissipativity(spec, radius=R).ok


def test_dissipativity_failures_and_degenerate():
    bad = PolynomialReaction(1, -1.0, [0.0, 0.0, 0.0])  # f = +eta^3
    rep = validate_dissipativity(bad)
    assert not rep.ok and "strictly positive" in rep.entries[0].message
    zero = validate_dissipativity(ZeroReaction())
    assert zero.ok and zero.entries[0].degenerate


def test_declared_bounds_enforced():
    spec = PolynomialReaction(1, 1.0, [0.0, 3.0, 0.0], bounds=(0.5, 2.0))
    assert spec.check() == ["lower coefficient exceeds declared bound 2.0"]


def test_growth_validator():
    fhn = presets.fhn_star(sigma=2.0)
    assert validate_growth(fhn).ok
    sat = presets.fhn_star(sigma=1.0, multiplicative=True, saturation=3.0)
    rep = validate_growth(sat)
    assert rep.ok and max(e.slope for e in rep.entries) == pytest.approx(0.0, abs=1e-12)
    sq = NetworkModel(2, (EdgeSpec(0, 1, reaction=FHNReaction(0.3)),), -np.eye(2),
                      (PolynomialNoise((0.0, 0.0, 1.0)), AdditiveNoise(0.0)))
    rep = validate_growth(sq)
    assert not rep.ok
    bad = [e for e in rep.entries if not e.ok]
    assert [e.location for e in bad] == ["vertex 1"] and bad[0].slope == pytest.approx(2.0, abs=1e-3)


def test_growth_respects_mixed_exponent():
    m = chain([poly(1), poly(2)], edge_noise=BoundedMultiplicativeNoise(1.0))
    rep = validate_growth(m)
    assert rep.exponent == pytest.approx(0.6) and rep.ok
    linear = chain([poly(1), poly(2)], edge_noise=PolynomialNoise((1.0, 1.0)))
    assert not validate_growth(linear).ok


def test_growth_lipschitz_radii():
    rep = validate_growth(chain([FHNReaction(0.3)], edge_noise=PolynomialNoise((0.0, 0.0, 1.0), cap=5.0)))
    lips = rep.entries[0].lipschitz
    assert lips[0] == pytest.approx(2.0, rel=1e-2) and lips[1] == pytest.approx(2 * np.sqrt(5), rel=1e-2)
