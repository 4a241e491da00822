import numpy as np
import pytest
import sympy

from netspde import presets
from netspde.discretization import (
    assemble,
    assemble_mass,
    build_grid,
    generator_apply,
    kirchhoff_residual,
    sample_profile,
)
from netspde.errors import ConfigurationError, ContractViolation
from netspde.graph import EdgeSpec, NetworkModel


def test_grid_dimensions(edge3, star):
    assert build_grid(edge3, 2).dim == 3
    assert build_grid(star, (4, 4, 4)).dim == 13
    path = NetworkModel(3, (EdgeSpec(0, 1), EdgeSpec(1, 2)), -np.eye(3))
    assert build_grid(path, (8, 8)).dim == 17


def test_grid_rejects_coarse(edge3):
    with pytest.raises(ConfigurationError):
        build_grid(edge3, 1)
    with pytest.raises(ConfigurationError):
        build_grid(edge3, (4, 4))


def test_grid_bijection(star):
    g = build_grid(star, (3, 5, 4))
    idx = np.concatenate([g.interior_indices(j) for j in range(g.m)] + [np.arange(g.n_interior, g.dim)])
    assert sorted(idx) == list(range(g.dim))
    assert g.column_names()[:2] == ["e1_x1", "e1_x2"] and g.column_names()[-1] == "v4"
    assert g.edge_nodes(1)[0] == g.vertex_index(0) and g.edge_nodes(1)[-1] == g.vertex_index(2)


def test_mass_examples(edge3, star):
    assert np.allclose(assemble_mass(edge3, build_grid(edge3, 4)), [0.25, 0.25, 0.25, 1.125, 1.125])
    m2 = presets.single_edge(mu=2.0)
    assert np.allclose(assemble_mass(m2, build_grid(m2, 2)), [1.0, 1.5, 1.5])
    # center of the star: mu h = 0.1 on three edges
    assert assemble_mass(star, build_grid(star, 10))[-4] == pytest.approx(1.15)


def test_stiffness_example_matches_symbolic_form(edge3):
    u, r1, r2 = sympy.symbols("u r1 r2")
    energy = 2 * (u - r1) ** 2 + 2 * (r2 - u) ** 2 + r1**2 + r2**2
    hess = sympy.hessian(energy / 2, (u, r1, r2))
    K = assemble(edge3, 2).stiffness.toarray()
    assert K.tolist() == [[4, -2, -2], [-2, 3, 0], [-2, 0, 3]]
    assert np.array_equal(K, np.array(hess, dtype=float))


def test_form_on_constants():
    m = presets.random_network_model(np.random.default_rng(7)).with_edges(p=0.0)
    op = assemble(m, 6)
    U = np.ones(op.dim)
    assert U @ op.stiffness @ U == pytest.approx(-m.M.sum())
    assert np.zeros(op.dim) @ op.stiffness @ np.zeros(op.dim) == 0.0


def test_drift_examples():
    m = presets.single_edge(d=1.0)
    D = assemble(m, 2).drift1.toarray()
    assert D[0].tolist() == [0.0, -1.0, 1.0]
    assert not D[1:].any()
    assert assemble(presets.single_edge(), 8).drift1.nnz == 0


def test_drift_exact_on_affine(star):
    m = star.with_edges(d=2.5)
    op = assemble(m, 9)
    U = sample_profile(op, [[0.3, 1.7]] * 3)
    out = op.drift1 @ U
    assert np.allclose(out[: op.layout.n_interior], 2.5 * 1.7, rtol=0, atol=1e-12)
    assert not out[op.layout.vertex_slice].any()


@pytest.mark.parametrize("seed", range(8))
def test_symmetry_coercivity_consistency(seed):
    rng = np.random.default_rng(seed)
    m = presets.random_network_model(rng)
    op = assemble(m, presets.random_cells(rng, m, high=12))
    K = op.stiffness
    assert abs(K - K.T).sum(axis=1).max() <= 1e-12 * abs(K).sum(axis=1).max()
    assert np.all(op.mass > 0)
    U, V = rng.standard_normal((2, op.dim))
    lhs, rhs = V @ (K @ U), -V @ (op.mass * generator_apply(op, U))
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert U @ (K @ U) > 0


def test_generator_apply(edge3):
    op = assemble(edge3, 2)
    assert not generator_apply(op, np.zeros(3)).any()
    dense = -op.stiffness.toarray() / op.mass[:, None]
    U = np.ones(3)
    assert np.allclose(generator_apply(op, U), dense @ U)
    assert generator_apply(op, U)[0] == 0.0
    assert np.allclose(generator_apply(op, U)[1:], -1.0 / 1.25)
    with pytest.raises(ContractViolation):
        generator_apply(op, np.ones(4))


def test_generator_kirchhoff_flux_single_edge():
    m = presets.single_edge()
    for N in (16, 64, 256):
        op = assemble(m, N)
        U = sample_profile(op, [[0.0, 1.0]])
        r = U[op.layout.vertex_slice]
        target = (m.M @ r)[0] + 1.0
        assert abs(generator_apply(op, U)[op.layout.vertex_index(0)] - target) < 2.0 / N


def test_kirchhoff_constant_and_linear(edge3, star):
    for m in (edge3, star):
        assert np.abs(kirchhoff_residual(assemble(m, 8), [[2.0]] * m.m)).max() <= 1e-12
    assert np.abs(kirchhoff_residual(assemble(edge3, 8), [[0.0, 1.0]])).max() <= 1e-12


def test_kirchhoff_quadratic_rate(edge3):
    res = [np.abs(kirchhoff_residual(assemble(edge3, N), [[0.0, 1.0, -1.0]])).max() for N in (8, 16, 32)]
    assert np.all(np.log2(np.array(res[:-1]) / res[1:]) >= 1.0)


def test_kirchhoff_variable_c_rate_approaches_one():
    m = presets.single_edge(c=[1.0, 1.0])
    res = np.array([np.abs(kirchhoff_residual(assemble(m, N), [[0.0, 1.0, -1.0]])).max() for N in (16, 32, 64, 128)])
    orders = np.log2(res[:-1] / res[1:])
    assert np.all(np.diff(orders) > 0) and orders[-1] == pytest.approx(1.0, abs=0.01)


def test_kirchhoff_rejects_discontinuous(star):
    with pytest.raises(ContractViolation):
        kirchhoff_residual(assemble(star, 4), [[1.0], [2.0], [1.0]])
