"""Adaptation strategies: self-learning, social steps, assembly, reductions."""

import numpy as np
import pytest

from adaptnets.graphs import (
    ClusterPartition,
    CombinationMatrix,
    SpectralKernel,
    apply_spectral_kernel,
    build_laplacian,
    complete_graph,
    consensus_subspace,
    Graph,
    metropolis_weights,
    random_geometric_graph,
    ring_graph,
)
from adaptnets.streaming import (
    NetworkSample,
    StreamModel,
    TaskField,
    draw_horizon,
    instantaneous_gradient,
)
from adaptnets.strategies import (
    EdgeRegularizer,
    InterestMap,
    StrategyConfig,
    StrategyState,
    build_strategy,
    cluster_metropolis,
    overlap_metropolis,
    self_learn,
    social_clustered,
    social_diffusion,
    social_noncooperative,
    social_overlapping,
    social_prox_l1,
    social_smooth,
    social_spectral,
    social_subspace,
    step,
)

EXACT_TOL = 1e-12
DENSE_RTOL = 1e-9


def path_graph(n):
    return Graph.from_edges(n, [[k, k + 1, 1.0] for k in range(n - 1)])


def mse_model(n, m, seed=0, noise=0.1):
    truth = TaskField.from_matrix(
        np.random.default_rng(seed).standard_normal((n, m)))
    return StreamModel(kind="mse", truth=truth, noise_var=noise)


def one_sample(model, seed=1):
    streams = [np.random.default_rng((seed, k)) for k in range(model.n_agents)]
    return draw_horizon(model, streams, 1).at(0)


# ---------------------------------------------------------------------------
# Configuration validation
# ---------------------------------------------------------------------------

def test_config_rejects_unknown_kind():
    with pytest.raises(ValueError):
        StrategyConfig(kind="gossip", mu=0.01)


def test_config_rejects_bad_stepsizes():
    with pytest.raises(ValueError):
        StrategyConfig(kind="diffusion", mu=0.0)
    with pytest.raises(ValueError):
        StrategyConfig(kind="diffusion", mu=np.inf)
    with pytest.raises(ValueError):
        StrategyConfig(kind="laplacian_reg", mu=0.01, eta=-1.0)


def test_config_rejects_eta_on_eta_free_kinds():
    for kind in ("noncooperative", "diffusion", "subspace_projection",
                 "overlapping"):
        with pytest.raises(ValueError):
            StrategyConfig(kind=kind, mu=0.01, eta=0.5)


def test_config_rejects_unknown_payload_keys():
    with pytest.raises(ValueError):
        StrategyConfig(kind="diffusion", mu=0.01, payload={"kernel": [1.0]})


# ---------------------------------------------------------------------------
# Self-learning
# ---------------------------------------------------------------------------

def test_self_learn_matches_gradient_loop_mse():
    model = mse_model(6, 3)
    samples = one_sample(model)
    w = np.random.default_rng(2).standard_normal((6, 3))
    fast = self_learn(w, model, samples, 0.05)
    slow = np.vstack([
        w[k] - 0.05 * instantaneous_gradient(model, k, w[k], samples.agent(k))
        for k in range(6)
    ])
    assert np.max(np.abs(fast - slow)) < 1e-14


def test_self_learn_matches_gradient_loop_logistic():
    truth = TaskField.from_matrix(
        np.random.default_rng(3).standard_normal((5, 2)))
    model = StreamModel(kind="logistic", truth=truth, reg=0.2)
    samples = one_sample(model, seed=4)
    w = np.random.default_rng(5).standard_normal((5, 2))
    fast = self_learn(w, model, samples, 0.1)
    slow = np.vstack([
        w[k] - 0.1 * instantaneous_gradient(model, k, w[k], samples.agent(k))
        for k in range(5)
    ])
    assert np.max(np.abs(fast - slow)) < 1e-14


def test_self_learn_blockwise_path():
    model = mse_model(4, 2)
    samples = one_sample(model)
    w = np.random.default_rng(6).standard_normal((4, 2))
    arr = self_learn(w, model, samples, 0.05)
    blk = self_learn(tuple(w), model, samples, 0.05)
    assert isinstance(blk, tuple)
    assert np.max(np.abs(np.vstack(blk) - arr)) < 1e-14


def test_self_learn_does_not_mutate_input():
    model = mse_model(3, 2)
    samples = one_sample(model)
    w = np.ones((3, 2))
    before = w.copy()
    self_learn(w, model, samples, 0.1)
    assert np.array_equal(w, before)


# ---------------------------------------------------------------------------
# Smooth and spectral social steps
# ---------------------------------------------------------------------------

def test_social_noncooperative_is_identity():
    psi = np.arange(6.0).reshape(3, 2)
    assert social_noncooperative(psi) is psi


def test_social_smooth_matches_dense():
    g = random_geometric_graph(15, 0.5, np.random.default_rng(7))
    spec = build_laplacian(g)
    psi = np.random.default_rng(8).standard_normal((15, 2))
    out = social_smooth(psi, g, 0.03)
    dense = psi - 0.03 * spec.laplacian @ psi
    assert np.max(np.abs(out - dense)) < EXACT_TOL


def test_social_spectral_two_agents_cubic():
    """Cubic kernel on one edge: L^3 = 4 L, so psi=[1,0] maps to [0.96, 0.04]."""
    g = path_graph(2)
    psi = np.array([[1.0], [0.0]])
    out = social_spectral(psi, g, [0.0, 0.0, 0.0, 1.0], 0.01)
    assert np.allclose(out, [[0.96], [0.04]], atol=1e-14)


def test_social_spectral_matches_eigen_apply():
    g = random_geometric_graph(12, 0.55, np.random.default_rng(9))
    spec = build_laplacian(g)
    kernel = SpectralKernel.polynomial([0.2, 0.1, 0.05, 0.01], spec)
    psi = np.random.default_rng(10).standard_normal((12, 3))
    out = social_spectral(psi, g, kernel.coefficients, 0.02)
    dense = psi - 0.02 * apply_spectral_kernel(kernel, spec) @ psi
    scale = np.max(np.abs(psi))
    assert np.max(np.abs(out - dense)) < DENSE_RTOL * scale


def test_social_spectral_matches_matrix_powers():
    g = ring_graph(9)
    lap = build_laplacian(g).laplacian
    coeffs = [0.3, 0.0, 0.2]
    psi = np.random.default_rng(11).standard_normal((9, 2))
    dense = 0.3 * np.eye(9) + 0.2 * lap @ lap
    expected = psi - 0.05 * dense @ psi
    out = social_spectral(psi, g, coeffs, 0.05)
    assert np.max(np.abs(out - expected)) < DENSE_RTOL


def test_social_spectral_linear_reduces_to_smooth():
    g = random_geometric_graph(10, 0.6, np.random.default_rng(12))
    psi = np.random.default_rng(13).standard_normal((10, 2))
    a = social_spectral(psi, g, [0.0, 1.0], 0.04)
    b = social_smooth(psi, g, 0.04)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# Proximal step
# ---------------------------------------------------------------------------

def test_prox_soft_threshold_single_neighbor():
    # argmin (x-3)^2/2 + |x| = 2: pull of one unit toward the neighbor
    g = path_graph(2)
    reg = EdgeRegularizer(np.array([[0.0, 1.0], [1.0, 0.0]]))
    psi = np.array([[3.0], [0.0]])
    out = social_prox_l1(psi, g, reg, 1.0)
    assert out[0, 0] == pytest.approx(2.0, abs=1e-12)
    assert out[1, 0] == pytest.approx(1.0, abs=1e-12)


def test_prox_collapses_onto_neighbor():
    # strong penalty clips at the breakpoint instead of crossing it
    g = path_graph(2)
    reg = EdgeRegularizer(np.array([[0.0, 1.0], [1.0, 0.0]]))
    psi = np.array([[0.5], [0.0]])
    out = social_prox_l1(psi, g, reg, 1.0)
    assert out[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_prox_balanced_neighbors_stay_put():
    g = path_graph(3)
    reg = EdgeRegularizer((build_laplacian(g).laplacian < 0) * 1.0)
    psi = np.array([[-1.0], [0.0], [1.0]])
    out = social_prox_l1(psi, g, reg, 0.3)
    assert out[1, 0] == pytest.approx(0.0, abs=1e-12)


def test_prox_zero_strength_is_copy():
    g = path_graph(3)
    reg = EdgeRegularizer((build_laplacian(g).laplacian < 0) * 1.0)
    psi = np.random.default_rng(14).standard_normal((3, 2))
    out = social_prox_l1(psi, g, reg, 0.0)
    assert np.array_equal(out, psi)
    assert out is not psi


def test_prox_agreement_is_fixed_point():
    g = ring_graph(6)
    reg = EdgeRegularizer((g.adjacency > 0) * 0.7)
    psi = np.tile([1.5, -2.0], (6, 1))
    out = social_prox_l1(psi, g, reg, 0.4)
    assert np.max(np.abs(out - psi)) < EXACT_TOL


def test_prox_matches_scalar_search():
    """Coordinatewise prox vs a brute-force golden-section minimizer."""
    from scipy.optimize import minimize_scalar

    rng = np.random.default_rng(15)
    g = ring_graph(5)
    raw = rng.uniform(0.2, 1.5, (5, 5))
    reg = EdgeRegularizer((g.adjacency > 0) * 0.5 * (raw + raw.T))
    psi = rng.standard_normal((5, 1)) * 2.0
    gamma = 0.6
    out = social_prox_l1(psi, g, reg, gamma)
    for k in range(5):
        nbrs = np.flatnonzero(reg.weights[k])

        def objective(x, k=k, nbrs=nbrs):
            quad = (x - psi[k, 0]) ** 2 / (2.0 * gamma)
            pen = sum(reg.weights[k, l] * abs(x - psi[l, 0]) for l in nbrs)
            return quad + pen

        res = minimize_scalar(objective, bounds=(-10.0, 10.0),
                              method="bounded",
                              options={"xatol": 1e-10})
        assert out[k, 0] == pytest.approx(res.x, abs=1e-7)


def test_prox_input_not_mutated():
    g = ring_graph(4)
    reg = EdgeRegularizer((g.adjacency > 0) * 1.0)
    psi = np.random.default_rng(16).standard_normal((4, 3))
    before = psi.copy()
    social_prox_l1(psi, g, reg, 0.5)
    assert np.array_equal(psi, before)


def test_edge_regularizer_validation():
    with pytest.raises(ValueError):
        EdgeRegularizer(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(ValueError):
        EdgeRegularizer(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        EdgeRegularizer(np.zeros((2, 2)), kind="l7")
    # diagonal entries are dropped
    reg = EdgeRegularizer(np.array([[5.0, 1.0], [1.0, 5.0]]))
    assert reg.weights[0, 0] == 0.0


# ---------------------------------------------------------------------------
# Diffusion, subspace, overlapping, clustered
# ---------------------------------------------------------------------------

def test_social_diffusion_agreement_fixed_point():
    g = ring_graph(7)
    a = metropolis_weights(g).matrix
    psi = np.tile([0.3, -1.2], (7, 1))
    out = social_diffusion(psi, a)
    assert np.max(np.abs(out - psi)) < EXACT_TOL


def test_social_subspace_matches_scalar_diffusion():
    g = ring_graph(6)
    a = metropolis_weights(g)
    psi = np.random.default_rng(17).standard_normal((6, 2))
    block = a.block_matrix([2] * 6)
    out = social_subspace(psi, block)
    ref = social_diffusion(psi, a.matrix)
    assert np.max(np.abs(out - ref)) < EXACT_TOL


def test_social_subspace_tuple_path():
    g = ring_graph(4)
    a = metropolis_weights(g)
    psi = np.random.default_rng(18).standard_normal((4, 3))
    block = a.block_matrix([3] * 4)
    out_mat = social_subspace(psi, block)
    out_tup = social_subspace(tuple(psi), block, block_sizes=[3] * 4)
    assert np.max(np.abs(np.vstack(out_tup) - out_mat)) < EXACT_TOL


def test_overlap_metropolis_small_chain():
    """Two agents share each variable on a 3-chain: every weight is 1/2."""
    g = path_graph(3)
    interest = InterestMap(2, ((0,), (0, 1), (1,)))
    weights = overlap_metropolis(g, interest)
    assert np.allclose(weights[0], 0.5)
    assert np.allclose(weights[1], 0.5)


def test_overlap_metropolis_rejects_disconnected_interest():
    g = path_graph(3)
    # agents 0 and 2 share variable 0 but are not adjacent
    interest = InterestMap(2, ((0,), (1,), (0, 1)))
    with pytest.raises(ValueError):
        overlap_metropolis(g, interest)


def test_social_overlapping_agreement_fixed_point():
    # ring 0-1-2-3-4: every variable's interested agents are contiguous
    g = ring_graph(5)
    interest = InterestMap(3, ((0,), (0, 1), (1,), (1, 2), (2,)))
    weights = overlap_metropolis(g, interest)
    shared = np.array([0.7, -0.2, 1.1])
    psi = interest.blocks_from_global(shared)
    out = social_overlapping(psi, interest, weights)
    for blk, ref in zip(out, psi):
        assert np.max(np.abs(blk - ref)) < EXACT_TOL


def test_social_overlapping_all_interested_is_diffusion():
    g = ring_graph(6)
    interest = InterestMap(2, tuple((0, 1) for _ in range(6)))
    weights = overlap_metropolis(g, interest)
    psi_mat = np.random.default_rng(19).standard_normal((6, 2))
    out = social_overlapping(tuple(psi_mat), interest, weights)
    ref = social_diffusion(psi_mat, metropolis_weights(g).matrix)
    assert np.max(np.abs(np.vstack(out) - ref)) < EXACT_TOL


def test_interest_map_validation():
    with pytest.raises(ValueError):
        InterestMap(2, ((0,), ()))
    with pytest.raises(ValueError):
        InterestMap(2, ((0, 0), (1,)))
    with pytest.raises(ValueError):
        InterestMap(2, ((0, 5), (1,)))
    with pytest.raises(ValueError):
        InterestMap(3, ((0,), (1,)))


def test_interest_blocks_from_global():
    interest = InterestMap(3, ((2, 0), (1,)))
    blocks = interest.blocks_from_global([10.0, 20.0, 30.0])
    assert np.array_equal(blocks[0], [30.0, 10.0])
    assert np.array_equal(blocks[1], [20.0])


def test_cluster_metropolis_block_structure():
    g = ring_graph(8)
    part = ClusterPartition((4, 4))
    combo = cluster_metropolis(g, part)
    a = combo.matrix
    assert np.max(np.abs(a[:4, 4:])) == 0.0
    assert np.max(np.abs(a[4:, :4])) == 0.0
    assert np.allclose(a.sum(axis=1), 1.0, atol=EXACT_TOL)
    assert np.allclose(a.sum(axis=0), 1.0, atol=EXACT_TOL)


def test_cluster_metropolis_rejects_disconnected_cluster():
    # cluster {0, 1, 2} on the chain 0-1-3-2: agent 2 only meets agent 3
    g = Graph.from_edges(4, [[0, 1, 1.0], [1, 3, 1.0], [3, 2, 1.0]])
    with pytest.raises(ValueError, match="not connected"):
        cluster_metropolis(g, ClusterPartition((3, 1)))


def test_social_clustered_single_cluster_is_diffusion():
    g = ring_graph(6)
    part = ClusterPartition((6,))
    a = cluster_metropolis(g, part).matrix
    psi = np.random.default_rng(20).standard_normal((6, 2))
    out = social_clustered(psi, part, a, None, 0.0)
    ref = social_diffusion(psi, metropolis_weights(g).matrix)
    assert np.array_equal(out, ref)


def test_social_clustered_singletons_reduce_to_prox():
    g = ring_graph(5)
    part = ClusterPartition((1,) * 5)
    intra = cluster_metropolis(g, part).matrix
    assert np.array_equal(intra, np.eye(5))
    reg = EdgeRegularizer((g.adjacency > 0) * 0.8)
    psi = np.random.default_rng(21).standard_normal((5, 2))
    out = social_clustered(psi, part, intra, reg, 0.3)
    ref = social_prox_l1(psi, g, reg, 0.3)
    assert np.array_equal(out, ref)


def test_social_clustered_quadratic_penalty():
    g = ring_graph(6)
    part = ClusterPartition((3, 3))
    intra = cluster_metropolis(g, part).matrix
    assign = part.assignment
    inter = (assign[:, None] != assign[None, :]) & (g.adjacency > 0)
    reg = EdgeRegularizer(inter * 0.5, kind="quadratic")
    psi = np.random.default_rng(22).standard_normal((6, 2))
    out = social_clustered(psi, part, intra, reg, 0.1)
    phi = intra @ psi
    lap = np.diag(reg.weights.sum(axis=1)) - reg.weights
    expected = phi - 0.1 * lap @ phi
    assert np.max(np.abs(out - expected)) < EXACT_TOL


# ---------------------------------------------------------------------------
# Assembly and stepping
# ---------------------------------------------------------------------------

def test_build_strategy_rejects_agent_mismatch():
    g = ring_graph(5)
    model = mse_model(4, 2)
    with pytest.raises(ValueError):
        build_strategy(StrategyConfig(kind="diffusion", mu=0.01), g, model)


def test_build_strategy_laplacian_stability():
    g = path_graph(2)  # lambda_max = 2, so mu*eta must stay below 1
    model = mse_model(2, 2)
    cfg = StrategyConfig(kind="laplacian_reg", mu=0.5, eta=2.5)
    with pytest.raises(ValueError, match="unstable"):
        build_strategy(cfg, g, model)
    ok = StrategyConfig(kind="laplacian_reg", mu=0.5, eta=1.9)
    build_strategy(ok, g, model)


def test_build_strategy_spectral_stability_and_kernel():
    g = path_graph(2)  # r(lambda) peaks at r(2) = 4
    model = mse_model(2, 2)
    cfg = StrategyConfig(kind="spectral_reg", mu=1.0, eta=0.6,
                         payload={"kernel": [0.0, 0.0, 1.0]})
    with pytest.raises(ValueError, match="unstable"):
        build_strategy(cfg, g, model)
    ok = StrategyConfig(kind="spectral_reg", mu=1.0, eta=0.4,
                        payload={"kernel": [0.0, 0.0, 1.0]})
    strat = build_strategy(ok, g, model)
    assert isinstance(strat.kernel, SpectralKernel)


def test_build_strategy_rejects_negative_kernel():
    g = path_graph(2)
    model = mse_model(2, 2)
    cfg = StrategyConfig(kind="spectral_reg", mu=0.01, eta=0.1,
                         payload={"kernel": [0.0, -1.0]})
    with pytest.raises(ValueError, match="negative"):
        build_strategy(cfg, g, model)


def test_build_strategy_rejects_offgraph_rho():
    g = path_graph(3)
    model = mse_model(3, 2)
    rho = np.zeros((3, 3))
    rho[0, 2] = rho[2, 0] = 1.0  # agents 0 and 2 are not neighbors
    cfg = StrategyConfig(kind="prox_l1", mu=0.01, eta=0.1,
                         payload={"rho": rho})
    with pytest.raises(ValueError, match="non-edge"):
        build_strategy(cfg, g, model)


def test_build_strategy_rejects_infeasible_combination():
    g = ring_graph(6)
    model = mse_model(6, 2)
    cfg = StrategyConfig(kind="subspace_projection", mu=0.01,
                         payload={"weights": np.eye(6)})
    with pytest.raises(ValueError, match="spectral"):
        build_strategy(cfg, g, model)


def test_build_strategy_rejects_row_only_stochastic():
    g = ring_graph(4)
    model = mse_model(4, 2)
    a = np.array([
        [0.9, 0.1, 0.0, 0.0],
        [0.1, 0.8, 0.1, 0.0],
        [0.0, 0.3, 0.4, 0.3],
        [0.3, 0.0, 0.3, 0.4],
    ])
    cfg = StrategyConfig(kind="diffusion", mu=0.01, payload={"weights": a})
    with pytest.raises(ValueError, match="columns"):
        build_strategy(cfg, g, model)


def test_build_strategy_rejects_cross_cluster_leak():
    g = ring_graph(6)
    model = mse_model(6, 2)
    a = metropolis_weights(g).matrix  # mixes across the cluster boundary
    cfg = StrategyConfig(kind="clustered", mu=0.01,
                         payload={"partition": (3, 3), "weights": a})
    with pytest.raises(ValueError, match="leak"):
        build_strategy(cfg, g, model)


def test_build_strategy_requires_uniform_blocks():
    g = path_graph(2)
    truth = TaskField((np.ones(2), np.ones(3)))
    model = StreamModel(kind="mse", truth=truth, noise_var=0.1)
    with pytest.raises(ValueError, match="uniform"):
        build_strategy(StrategyConfig(kind="diffusion", mu=0.01), g, model)


def test_step_increments_and_preserves_input():
    g = ring_graph(5)
    model = mse_model(5, 2)
    strat = build_strategy(StrategyConfig(kind="diffusion", mu=0.05), g, model)
    state = strat.init_state()
    assert state.iteration == 0
    assert np.array_equal(state.w, np.zeros((5, 2)))
    samples = one_sample(model)
    before = np.array(state.w, copy=True)
    nxt = strat.step(state, model, samples)
    assert nxt.iteration == 1
    assert np.array_equal(state.w, before)
    assert nxt.w is not state.w


def test_functional_step_matches_method():
    g = ring_graph(5)
    model = mse_model(5, 2)
    strat = build_strategy(
        StrategyConfig(kind="laplacian_reg", mu=0.05, eta=0.5), g, model)
    samples = one_sample(model)
    state = strat.init_state(np.ones((5, 2)))
    a = strat.step(state, model, samples)
    b = step(state, model, samples, strat)
    assert np.array_equal(a.w, b.w)
    assert a.iteration == b.iteration


def test_init_state_copies_initial():
    g = ring_graph(4)
    model = mse_model(4, 2)
    strat = build_strategy(StrategyConfig(kind="noncooperative", mu=0.05),
                           g, model)
    init = np.ones((4, 2))
    state = strat.init_state(init)
    init[0, 0] = 99.0
    assert state.w[0, 0] == 1.0
