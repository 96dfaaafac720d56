import numpy as np
import pytest

from privgraph.fgw import (
    FgwParams,
    GraphMeasure,
    fgw_cost,
    fgw_exact_small,
    fgw_to_reference,
    fgw_upper_bound,
    graph_to_measure,
    ipm_lower_bound,
    matched_plan_cost,
    mc_expected_fgw,
    plan_coupling,
    product_coupling,
    reference_graphs,
    spawn_streams,
    wasserstein_uniform_exact,
    worst_pair_cost,
)
from privgraph.generator import generate_coupled_graphs
from privgraph.graphs import AttributedGraph, chung_lu, constant_kernel
from privgraph.measures import PrivateMeasureResult, ProbabilityMeasure, SignedMeasure
from privgraph.noise import discrete_laplace, zero_noise
from privgraph.space import AttributeDataset, SpaceConfig, build_grid_partition


def _graph(attrs, edges, ids=None):
    attrs = np.atleast_2d(np.asarray(attrs, dtype=float))
    n = attrs.shape[0]
    if attrs.shape[1] == 0:
        attrs = attrs.reshape(n, 1)
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    ids = np.linspace(0.1, 0.9, n) if ids is None else np.asarray(ids, float)
    return AttributedGraph(attributes=attrs, identifiers=ids, adjacency=adj)


def _random_measure(rng, n, d=1, edge_p=0.5, params=FgwParams()):
    attrs = rng.random((n, d))
    adj = np.triu(rng.random((n, n)) < edge_p, 1)
    g = _graph(attrs, list(zip(*np.nonzero(adj))) if adj.any() else [])
    return graph_to_measure(g, params)


def brute_force_cost(pi, a, b, params):
    """Literal quadruple sum; the independent oracle for the vectorized cost."""
    n, m = a.n, b.n
    total = 0.0
    for i in range(n):
        for j in range(m):
            d_feat = np.max(np.abs(a.attributes[i] - b.attributes[j]))
            for k in range(n):
                for l in range(m):
                    term = (1 - params.alpha) * d_feat + params.alpha * abs(
                        a.structure[i, k] - b.structure[j, l]
                    )
                    total += term * pi[i, j] * pi[k, l]
    return total


def test_graph_to_measure_examples():
    params = FgwParams(alpha=0.5, C=1.0)
    single = graph_to_measure(_graph([[0.5]], []), params)
    assert single.weights.tolist() == [1.0]
    assert single.structure.tolist() == [[0.0]]
    pair = graph_to_measure(_graph([[0.2], [0.8]], [(0, 1)]), params)
    assert pair.structure.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    complete = graph_to_measure(
        _graph([[0.1], [0.2], [0.3]], [(0, 1), (0, 2), (1, 2)]), FgwParams(C=2.0)
    )
    off = complete.structure[~np.eye(3, dtype=bool)]
    assert np.all(off == 2.0)
    with pytest.raises(ValueError):
        graph_to_measure(
            AttributedGraph(
                attributes=np.zeros((0, 1)),
                identifiers=np.zeros(0),
                adjacency=np.zeros((0, 0), bool),
            ),
            params,
        )


def test_fgw_cost_identical_single_vertex():
    params = FgwParams(alpha=0.5)
    a = graph_to_measure(_graph([[0.4]], []), params)
    assert fgw_cost(np.array([[1.0]]), a, a, params) == 0.0


def test_fgw_cost_two_singletons():
    params = FgwParams(alpha=0.5)
    a = graph_to_measure(_graph([[0.0]], []), params)
    b = graph_to_measure(_graph([[1.0]], []), params)
    assert fgw_cost(np.array([[1.0]]), a, b, params) == pytest.approx(0.5)


def test_fgw_cost_constant_over_polytope():
    # same attrs, one side has the edge: structural cost is marginal-determined
    params = FgwParams(alpha=1.0, C=1.0)
    a = graph_to_measure(_graph([[0.3], [0.7]], [(0, 1)]), params)
    b = graph_to_measure(_graph([[0.3], [0.7]], []), params)
    rng = np.random.default_rng(0)
    for _ in range(10):
        t = rng.random() * 0.5
        pi = np.array([[t, 0.5 - t], [0.5 - t, t]])
        assert fgw_cost(pi, a, b, params) == pytest.approx(0.5, abs=1e-12)


def test_fgw_cost_matches_brute_force():
    rng = np.random.default_rng(1)
    params = FgwParams(alpha=0.6, C=1.0)
    for _ in range(10):
        a = _random_measure(rng, int(rng.integers(1, 4)), params=params)
        b = _random_measure(rng, int(rng.integers(1, 4)), params=params)
        pi = product_coupling(a, b)
        assert fgw_cost(pi, a, b, params) == pytest.approx(
            brute_force_cost(pi, a, b, params), abs=1e-10
        )


def test_fgw_cost_generic_structure_path_agrees():
    # force the generic tensor path by perturbing one structural entry
    rng = np.random.default_rng(2)
    params = FgwParams(alpha=0.7, C=1.0)
    a = _random_measure(rng, 3, params=params)
    s = a.structure.copy()
    s[0, 1] = s[1, 0] = 0.41
    a2 = GraphMeasure(attributes=a.attributes, weights=a.weights, structure=s)
    b = _random_measure(rng, 3, params=params)
    pi = product_coupling(a2, b)
    assert fgw_cost(pi, a2, b, params) == pytest.approx(
        brute_force_cost(pi, a2, b, params), abs=1e-10
    )


def test_exact_small_identity_and_symmetry():
    rng = np.random.default_rng(3)
    params = FgwParams(alpha=0.5)
    for _ in range(5):
        a = _random_measure(rng, int(rng.integers(1, 5)), params=params)
        assert fgw_exact_small(a, a, params) == pytest.approx(0.0, abs=1e-9)
        b = _random_measure(rng, int(rng.integers(1, 5)), params=params)
        ab = fgw_exact_small(a, b, params)
        ba = fgw_exact_small(b, a, params)
        assert ab == pytest.approx(ba, abs=1e-6)


def test_exact_small_constant_instance():
    params = FgwParams(alpha=1.0, C=1.0)
    a = graph_to_measure(_graph([[0.3], [0.7]], [(0, 1)]), params)
    b = graph_to_measure(_graph([[0.3], [0.7]], []), params)
    assert fgw_exact_small(a, b, params) == pytest.approx(0.5, abs=1e-9)


def test_exact_small_alpha0_equals_wasserstein():
    rng = np.random.default_rng(4)
    params = FgwParams(alpha=0.0)
    for _ in range(8):
        n = int(rng.integers(1, 5))
        a = _random_measure(rng, n, params=params)
        b = _random_measure(rng, n, params=params)
        oracle = wasserstein_uniform_exact(a.attributes, b.attributes)
        assert fgw_exact_small(a, b, params) == pytest.approx(oracle, abs=1e-6)


def test_exact_small_size_cap():
    rng = np.random.default_rng(5)
    params = FgwParams()
    big = _random_measure(rng, 5, params=params)
    with pytest.raises(ValueError):
        fgw_exact_small(big, big, params)


def test_upper_bound_from_optimal_start_stays_optimal():
    params = FgwParams(alpha=0.0)
    a = graph_to_measure(_graph([[0.0], [1.0]], []), params)
    b = graph_to_measure(_graph([[0.0], [1.0]], []), params)
    ident = np.diag([0.5, 0.5])
    val, _ = fgw_upper_bound(a, b, params, init=ident, iterations=20)
    assert val == pytest.approx(0.0, abs=1e-12)


def test_upper_bound_monotone_per_iteration():
    rng = np.random.default_rng(6)
    params = FgwParams(alpha=0.5)
    for _ in range(200):
        a = _random_measure(rng, int(rng.integers(2, 5)), params=params)
        b = _random_measure(rng, int(rng.integers(2, 5)), params=params)
        pi = product_coupling(a, b)
        prev = fgw_cost(pi, a, b, params)
        for _step in range(4):
            val, pi = fgw_upper_bound(a, b, params, init=pi, iterations=1)
            assert val <= prev + 1e-12
            prev = val


def test_upper_bound_sandwich_vs_exact():
    rng = np.random.default_rng(7)
    params = FgwParams(alpha=0.5)
    for _ in range(15):
        a = _random_measure(rng, 4, params=params)
        b = _random_measure(rng, 4, params=params)
        init = product_coupling(a, b)
        init_cost = fgw_cost(init, a, b, params)
        val, _ = fgw_upper_bound(a, b, params, init=init, iterations=50)
        exact = fgw_exact_small(a, b, params)
        assert exact - 1e-9 <= val <= init_cost + 1e-12


def _fixed_private(part, counts, weights, reps):
    n = int(np.sum(counts))
    raw = SignedMeasure(support=reps, weights=np.asarray(counts, float) / n)
    return PrivateMeasureResult(
        representatives=reps,
        counts=np.asarray(counts, dtype=np.int64),
        noise_draws=np.zeros(part.m, dtype=np.int64),
        raw_measure=raw,
        private_measure=ProbabilityMeasure(support=reps, weights=np.asarray(weights, float)),
        tv_residual=float(np.abs(np.asarray(counts, float) / n - weights).sum()),
    )


def test_matched_plan_zero_when_data_sit_on_representatives():
    part = build_grid_partition(SpaceConfig(d=1), 2)
    reps = np.array([[0.25], [0.75]])
    data = AttributeDataset(points=np.repeat(reps, 10, axis=0))
    private = _fixed_private(part, [10, 10], [0.5, 0.5], reps)
    params = FgwParams(alpha=0.5)
    rng = np.random.default_rng(8)
    pair = generate_coupled_graphs(
        data, part, zero_noise(), 20, 20, chung_lu(1), rng, private=private
    )
    assert matched_plan_cost(pair, params) == pytest.approx(0.0, abs=1e-12)


def test_matched_plan_worst_case_when_no_matches():
    part = build_grid_partition(SpaceConfig(d=1), 2)
    reps = np.array([[0.25], [0.75]])
    data = AttributeDataset(points=np.full((10, 1), 0.25))
    private = _fixed_private(part, [10, 0], [0.0, 1.0], reps)
    params = FgwParams(alpha=0.5, C=1.0)
    rng = np.random.default_rng(9)
    pair = generate_coupled_graphs(
        data, part, zero_noise(), 10, 10, chung_lu(1), rng, private=private
    )
    assert pair.match_count == 0
    worst = worst_pair_cost(params, 1.0, pair.kernel.lipschitz_constant)
    assert matched_plan_cost(pair, params) == pytest.approx(worst)
    assert worst == pytest.approx(0.5 * 1.0 + 0.5 * min(1.0, 2.0))


def test_plan_dominance_chain_on_small_pairs():
    rng_master = np.random.default_rng(10)
    part = build_grid_partition(SpaceConfig(d=1), 2)
    data = AttributeDataset(points=rng_master.random((12, 1)))
    params = FgwParams(alpha=0.5)
    checked = 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        pair = generate_coupled_graphs(
            data, part, discrete_laplace(1.0), 3, 3, chung_lu(1), rng
        )
        nt, ns = pair.true_graph.n_vertices, pair.synthetic_graph.n_vertices
        if not (1 <= nt <= 4 and 1 <= ns <= 4):
            continue
        charge = matched_plan_cost(pair, params)
        a, b, pi = plan_coupling(pair, params)
        plan_cost = fgw_cost(pi, a, b, params)
        refined, _ = fgw_upper_bound(a, b, params, init=pi, iterations=50)
        exact = fgw_exact_small(a, b, params)
        assert charge >= plan_cost - 1e-9
        assert plan_cost >= refined - 1e-12
        assert refined >= exact - 1e-9
        checked += 1
    assert checked >= 10


def test_plan_cost_exact_matches_dense_evaluation():
    rng = np.random.default_rng(14)
    part = build_grid_partition(SpaceConfig(d=1), 4)
    data = AttributeDataset(points=rng.random((40, 1)))
    params = FgwParams(alpha=0.5)
    from privgraph.fgw import plan_cost_exact

    for seed in range(8):
        pair = generate_coupled_graphs(
            data, part, discrete_laplace(1.0), 12, 9, chung_lu(1), np.random.default_rng(seed)
        )
        a, b, pi = plan_coupling(pair, params)
        dense = fgw_cost(pi, a, b, params)
        sparse = plan_cost_exact(pair, params)
        assert sparse == pytest.approx(dense, abs=1e-10)


def test_plan_coupling_is_feasible():
    part = build_grid_partition(SpaceConfig(d=1), 4)
    data = AttributeDataset(points=np.random.default_rng(0).random((40, 1)))
    params = FgwParams()
    pair = generate_coupled_graphs(
        data, part, discrete_laplace(1.0), 25, 15, chung_lu(1), np.random.default_rng(11)
    )
    a, b, pi = plan_coupling(pair, params)
    assert np.allclose(pi.sum(axis=1), a.weights, atol=1e-12)
    assert np.allclose(pi.sum(axis=0), b.weights, atol=1e-12)
    assert pi.min() >= 0


def test_mc_degenerate_config_is_zero():
    part = build_grid_partition(SpaceConfig(d=1), 1)
    reps = np.array([[0.5]])
    data = AttributeDataset(points=np.array([[0.5]]))
    private = _fixed_private(part, [1], [1.0], reps)
    res = mc_expected_fgw(
        data,
        part,
        zero_noise(),
        10,
        10,
        constant_kernel(0.0),
        FgwParams(alpha=0.5),
        replicates=20,
        seed=0,
        private=private,
    )
    assert res.mean == 0.0 and res.stderr == 0.0
    assert res.plan_mean == 0.0


def test_mc_deterministic_given_seed():
    part = build_grid_partition(SpaceConfig(d=1), 4)
    data = AttributeDataset(points=np.random.default_rng(1).random((30, 1)))
    kw = dict(
        noise=discrete_laplace(1.0),
        a=8.0,
        b=8.0,
        kernel=chung_lu(1),
        params=FgwParams(),
        replicates=10,
        seed=99,
    )
    r1 = mc_expected_fgw(data, part, **kw)
    r2 = mc_expected_fgw(data, part, **kw)
    assert r1.mean == r2.mean and r1.stderr == r2.stderr
    assert np.array_equal(r1.values, r2.values)


def test_mc_small_config_below_grid_bound():
    from privgraph.bounds import BoundInputs, expected_fgw_bound_grid

    rng = np.random.default_rng(2)
    n, m = 200, 8
    part = build_grid_partition(SpaceConfig(d=1), m)
    data = AttributeDataset(points=rng.random((n, 1)))
    eps = 1.0
    res = mc_expected_fgw(
        data,
        part,
        discrete_laplace(eps),
        float(m * m),
        float(m * m),
        chung_lu(1),
        FgwParams(alpha=0.5),
        replicates=120,
        seed=3,
    )
    inp = BoundInputs(a=float(m * m), b=float(m * m), n=n, m=m, eps=eps, d=1)
    bound = expected_fgw_bound_grid(inp).total
    assert res.plan_mean <= bound + 3 * res.plan_stderr
    assert res.mean <= res.plan_mean + 3 * (res.stderr + res.plan_stderr)


def test_reference_graphs_and_exact_singleton_values():
    refs = reference_graphs(d=1)
    assert len(refs) >= 5
    params = FgwParams(alpha=0.5)
    sample = _graph([[1.0]], [])
    ref0 = _graph([[0.0]], [])
    assert fgw_to_reference(ref0, sample, params) == pytest.approx(0.5)
    # exact singleton evaluation equals the small oracle
    rng = np.random.default_rng(12)
    g = _graph(rng.random((3, 1)), [(0, 1)])
    direct = fgw_to_reference(ref0, g, params)
    oracle = fgw_exact_small(
        graph_to_measure(ref0, params), graph_to_measure(g, params), params
    )
    assert direct == pytest.approx(oracle, abs=1e-9)


def test_ipm_lower_bound_examples():
    params = FgwParams(alpha=0.5)
    zeros = [_graph([[0.0]], []) for _ in range(5)]
    ones = [_graph([[1.0]], []) for _ in range(5)]
    refs = [_graph([[0.0]], [])]
    assert ipm_lower_bound(zeros, zeros, refs, params) == 0.0
    assert ipm_lower_bound(zeros, ones, refs, params) == pytest.approx(0.5)


def test_ipm_below_expected_distance_on_generator_samples():
    rng = np.random.default_rng(13)
    part = build_grid_partition(SpaceConfig(d=1), 4)
    data = AttributeDataset(points=rng.random((100, 1)))
    params = FgwParams(alpha=0.5)
    kern = chung_lu(1)
    noise = discrete_laplace(1.0)
    trues, syns = [], []
    for stream in spawn_streams(5, 60):
        pair = generate_coupled_graphs(data, part, noise, 16.0, 16.0, kern, stream)
        trues.append(pair.true_graph)
        syns.append(pair.synthetic_graph)
    worst = worst_pair_cost(params, 1.0, kern.lipschitz_constant)
    ipm = ipm_lower_bound(trues, syns, reference_graphs(1), params, empty_value=worst)
    res = mc_expected_fgw(
        data, part, noise, 16.0, 16.0, kern, params, replicates=60, seed=5
    )
    assert ipm <= res.mean + 3 * res.stderr


def test_wasserstein_oracle_basics():
    assert wasserstein_uniform_exact(np.array([[0.0]]), np.array([[1.0]])) == pytest.approx(1.0)
    pts = np.array([[0.0], [1.0]])
    assert wasserstein_uniform_exact(pts, pts) == pytest.approx(0.0)
    # unequal sizes via the transport LP: {0} vs {0, 1} uniform
    val = wasserstein_uniform_exact(np.array([[0.0]]), pts)
    assert val == pytest.approx(0.5)
