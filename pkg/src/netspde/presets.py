"""Ready-made models used by the tests, the acceptance suite and the CLI examples."""

from __future__ import annotations

import numpy as np

from .dynamics import AdditiveNoise, BoundedMultiplicativeNoise, FHNReaction, ZeroReaction
from .graph import EdgeSpec, NetworkModel


def single_edge(mu=1.0, c=1.0, p=0.0, d=0.0, M=((-1.0, 0.0), (0.0, -1.0)), reaction=None, edge_noise=None,
                vertex_noise=None):
    """One edge ``v1 -> v2``; with the defaults this is the heat equation with ``M = -I``."""
    e = EdgeSpec(0, 1, mu=mu, c=c, d=d, p=p, reaction=reaction or ZeroReaction(),
                 edge_noise=edge_noise or AdditiveNoise(0.0))
    return NetworkModel(2, (e,), np.asarray(M, dtype=float), vertex_noise)


def star_edges(arms=3, **edge_kw):
    return tuple(EdgeSpec(0, i + 1, **edge_kw) for i in range(arms))


def star_vertex_matrix(arms=3, coupling=0.25, loss=1.0):
    """Center tied to every leaf with weight ``coupling``; each row sums to ``-loss``."""
    n = arms + 1
    M = np.zeros((n, n))
    M[0, 1:] = M[1:, 0] = coupling
    M[0, 0] = -(arms * coupling + loss)
    M[1:, 1:] = np.diag(np.full(arms, -(coupling + loss)))
    return M


def fhn_star(a=0.3, sigma=0.0, vertex_sigma=0.0, saturation=None, multiplicative=False):
    """Reference network: FitzHugh-Nagumo reaction on a 3-star centered at ``v1``.

    Noise is additive by default; ``multiplicative=True`` uses the bounded
    multiplicative coefficient ``sigma (1 + min(|eta|, saturation))``.
    """
    if multiplicative:
        noise = lambda s: BoundedMultiplicativeNoise(s, saturation)
    else:
        noise = AdditiveNoise
    edges = tuple(
        EdgeSpec(0, i, mu=1.0, c=1.0, reaction=FHNReaction(a), edge_noise=noise(sigma)) for i in (1, 2, 3)
    )
    return NetworkModel(4, edges, star_vertex_matrix(), tuple(noise(vertex_sigma) for _ in range(4)))


def linear_star(sigma=0.5, vertex_sigma=0.5):
    """Linear 3-star with additive noise on edges and vertices (no reaction)."""
    edges = star_edges(3, mu=1.0, c=1.0, edge_noise=AdditiveNoise(sigma))
    return NetworkModel(4, edges, star_vertex_matrix(), tuple(AdditiveNoise(vertex_sigma) for _ in range(4)))


def heat_edge():
    """Single edge heat equation, ``c = 1``, ``p = 0``, ``M = -I``."""
    return single_edge()


def random_network_model(rng, max_vertices=8, max_edges=10, loss=(0.0, 2.0)):
    """Random connected model: a random spanning tree plus extra (cycle-closing) edges.

    Coefficients are random constants or low-degree polynomials positive on
    [0, 1]; ``M`` is a random admissible vertex matrix whose row sums lie in
    ``-(loss)`` shifted by a small positive margin.  ``rng`` is a
    ``numpy.random.Generator``.
    """
    n = int(rng.integers(2, max_vertices + 1))
    pairs = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    extra = int(rng.integers(0, max_edges - len(pairs) + 1))
    for _ in range(extra):
        a, b = rng.choice(n, size=2, replace=False)
        pairs.append((int(a), int(b)))
    edges = []
    for a, b in pairs:
        if rng.random() < 0.5:
            a, b = b, a
        edges.append(EdgeSpec(a, b, mu=float(rng.uniform(0.2, 3.0)), c=_positive_profile(rng),
                              p=_positive_profile(rng, zero_ok=True)))
    W = np.triu(rng.uniform(0.0, 1.0, (n, n)) * (rng.random((n, n)) < 0.5), 1)
    W = W + W.T
    M = W - np.diag(W.sum(axis=1) + rng.uniform(loss[0], loss[1], n) + 1e-3)
    return NetworkModel(n, tuple(edges), M)


def random_cells(rng, model, low=2, high=32):
    return [int(v) for v in rng.integers(low, high + 1, model.m)]


def _positive_profile(rng, zero_ok=False):
    kind = rng.integers(0, 3)
    if zero_ok and rng.random() < 0.3:
        return 0.0
    if kind == 0:
        return float(rng.uniform(0.2, 3.0))
    if kind == 1:
        c0 = rng.uniform(0.5, 2.0)
        return [c0, float(rng.uniform(-0.4, 1.0) * c0)]
    base = rng.uniform(0.5, 2.0)
    return [base, float(rng.uniform(-0.3, 0.3)), float(rng.uniform(0.0, 0.5))]
