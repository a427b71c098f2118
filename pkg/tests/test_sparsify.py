import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polopt import generators as gen
from polopt.dynamics import index
from polopt.graph import WeightedGraph, is_connected, laplacian
from polopt.sparsify import (
    DisconnectedSparsifierWarning,
    SparsifyConfig,
    effective_resistances,
    rescale_trace,
    sampling_probabilities,
    sparsify,
)
from polopt.topology import TopologyProblem, solve

from conftest import random_graph

TRIANGLE = WeightedGraph(3, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))


def resistance_by_solve(g, u, v):
    """Potential difference when one unit of current enters at u and leaves at v."""
    L = laplacian(g)
    b = np.zeros(g.n)
    b[u], b[v] = 1.0, -1.0
    # ground the last node
    keep = np.arange(g.n) != g.n - 1
    x = np.zeros(g.n)
    x[keep] = np.linalg.solve(L[np.ix_(keep, keep)], b[keep])
    return x[u] - x[v]


def test_resistance_examples():
    np.testing.assert_allclose(effective_resistances(WeightedGraph(2, ((0, 1, 4.0),))), [0.25])
    path = WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
    np.testing.assert_allclose(effective_resistances(path), [1.0, 1.0])
    assert resistance_by_solve(path, 0, 2) == pytest.approx(2.0)
    np.testing.assert_allclose(effective_resistances(TRIANGLE), [2 / 3] * 3)


def test_resistance_rejects_disconnected():
    with pytest.raises(ValueError):
        effective_resistances(WeightedGraph(3, ((0, 1, 1.0),)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 14))
def test_foster_identity_and_grounded_oracle(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p=0.6)
    if not is_connected(g):
        return
    R = effective_resistances(g)
    _, _, w = g.arrays()
    assert np.sum(w * R) == pytest.approx(n - 1, abs=1e-6)
    for k, (u, v, _) in enumerate(g.edges[:5]):
        assert R[k] == pytest.approx(resistance_by_solve(g, u, v), rel=1e-9)
    assert sampling_probabilities(g).sum() == pytest.approx(1.0, abs=1e-12)


def test_sample_count():
    assert SparsifyConfig(samples=7).sample_count(100) == 7
    assert SparsifyConfig(epsilon=0.5).sample_count(10) == int(np.ceil(4 * 10 * np.log(10) / 0.25))
    for bad in (dict(), dict(epsilon=0.1, samples=3), dict(epsilon=1.5), dict(samples=0)):
        with pytest.raises(ValueError):
            SparsifyConfig(**bad)


def test_single_sample():
    g = WeightedGraph(4, ((0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 0.5)))
    p = sampling_probabilities(g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedSparsifierWarning)
        out = sparsify(g, SparsifyConfig(samples=1, seed=3))
    assert out.m == 1
    (u, v, w_new), = out.edges
    k = [(a, b) for a, b, _ in g.edges].index((u, v))
    assert w_new == pytest.approx(g.edges[k][2] / p[k])


def test_disconnected_result_warns():
    g = WeightedGraph(4, ((0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)))
    with pytest.warns(DisconnectedSparsifierWarning):
        sparsify(g, SparsifyConfig(samples=1, seed=0))


def test_deterministic_given_seed():
    g = random_graph(np.random.default_rng(1), 20, p=0.5)
    cfg = SparsifyConfig(samples=60, seed=11)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedSparsifierWarning)
        assert sparsify(g, cfg) == sparsify(g, cfg)
        assert sparsify(g, cfg) != sparsify(g, SparsifyConfig(samples=60, seed=12))


def test_quadratic_form_preserved_with_many_samples():
    eps = 0.25
    hits = 0
    seeds = range(40)
    x = np.random.default_rng(0).normal(size=(100, 3))
    L = laplacian(TRIANGLE)
    base = np.einsum("ki,ij,kj->k", x, L, x)
    for seed in seeds:
        Ls = laplacian(sparsify(TRIANGLE, SparsifyConfig(samples=2000, seed=seed)))
        ratio = np.einsum("ki,ij,kj->k", x, Ls, x) / base
        hits += bool(np.all((ratio >= 1 - eps) & (ratio <= 1 + eps)))
    assert hits >= 0.95 * len(seeds)


def test_sampled_laplacian_is_unbiased():
    g = WeightedGraph(4, ((0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 0.5), (0, 2, 1.5)))
    L = laplacian(g)
    K = 3000
    acc = np.zeros((4, 4))
    acc2 = np.zeros((4, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedSparsifierWarning)
        for seed in range(K):
            Ls = laplacian(sparsify(g, SparsifyConfig(samples=5, seed=seed)))
            acc += Ls
            acc2 += Ls * Ls
    mean = acc / K
    se = np.sqrt(np.maximum(acc2 / K - mean**2, 0) / K)
    assert np.all(np.abs(mean - L) <= 4 * se + 1e-12)


def test_disconnected_input_is_sampled_per_component():
    g = WeightedGraph(5, ((0, 1, 1.0), (1, 2, 1.0), (3, 4, 2.0)))
    p = sampling_probabilities(g)
    # each component's leverage sums to (size - 1); 3 nodes -> 2, 2 nodes -> 1
    np.testing.assert_allclose(p, [1 / 3, 1 / 3, 1 / 3])
    out = sparsify(g, SparsifyConfig(samples=500, seed=0))
    assert out.m == 3


def test_rescale_trace():
    g = WeightedGraph(3, ((0, 1, 1.0), (1, 2, 2.0)))
    r = rescale_trace(g, 1.0)
    np.testing.assert_allclose([w for *_, w in r.edges], [1 / 3, 2 / 3])
    assert np.trace(laplacian(r)) == pytest.approx(2.0)
    assert rescale_trace(g, 3.0) == g
    with pytest.raises(ValueError):
        rescale_trace(WeightedGraph(3), 1.0)
    with pytest.raises(ValueError):
        rescale_trace(g, 0.0)


def test_sparsified_optimum_within_bound():
    eps = 0.25
    ok = 0
    seeds = range(10)
    for seed in seeds:
        n = 50
        s = gen.power_law_sample(n, 2.0, seed)
        total = gen.erdos_renyi(n, 0.5, seed + 1000).total_weight()
        sol = solve(TopologyProblem(s, total))
        sp = rescale_trace(sparsify(sol.graph(), SparsifyConfig(epsilon=eps, seed=seed)), total)
        value = index(sp, s).index
        assert value >= sol.objective - 1e-6
        ok += value <= (1 + 2 * eps) * sol.objective
    assert ok >= 0.95 * len(seeds)
