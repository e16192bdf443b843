"""Configuration parsing, canonicalization, stream namespacing, resolution."""

import json

import numpy as np
import pytest

from adaptnets.config import (
    ConfigError,
    ExperimentConfig,
    data_stream,
    load_config,
    parse_config,
    resolve,
    setup_stream,
)
from adaptnets.graphs import save_graph, ring_graph
from adaptnets.streaming import TaskField, save_tasks


def doc(**overrides):
    base = {
        "schema": 1,
        "seed": 7,
        "iters": 100,
        "runs": 2,
        "graph": {"kind": "ring", "n": 8},
        "model": {"kind": "mse", "m": 2, "noise_var": 0.1,
                  "truth": {"kind": "smooth", "modes": 3, "scale": 0.5}},
        "strategy": {"kind": "laplacian_reg", "mu": 0.01, "eta": 1.0},
    }
    base.update(overrides)
    return base


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

def test_parse_roundtrip_defaults():
    cfg = parse_config(doc())
    assert cfg.seed == 7
    assert cfg.parallel == 1
    assert cfg.record_every == 1
    assert cfg.steady_window == 0.1
    assert cfg.eta_grid is None


def test_parse_rejects_unknown_top_level_key():
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(doc(extra=1))


def test_parse_rejects_missing_keys():
    bad = doc()
    del bad["graph"]
    with pytest.raises(ConfigError, match="missing"):
        parse_config(bad)


def test_parse_rejects_wrong_schema():
    with pytest.raises(ConfigError, match="schema"):
        parse_config(doc(schema=99))


def test_parse_rejects_bad_scalars():
    with pytest.raises(ConfigError):
        parse_config(doc(seed=-1))
    with pytest.raises(ConfigError):
        parse_config(doc(iters=0))
    with pytest.raises(ConfigError):
        parse_config(doc(runs="three"))
    with pytest.raises(ConfigError):
        parse_config(doc(record_every=200))  # exceeds iters=100
    with pytest.raises(ConfigError):
        parse_config(doc(steady_window=0.0))


def test_parse_rejects_unknown_kinds():
    with pytest.raises(ConfigError, match="graph kind"):
        parse_config(doc(graph={"kind": "torus", "n": 8}))
    bad_truth = doc()
    bad_truth["model"]["truth"] = {"kind": "fractal"}
    with pytest.raises(ConfigError, match="truth kind"):
        parse_config(bad_truth)
    with pytest.raises(ConfigError, match="strategy kind"):
        parse_config(doc(strategy={"kind": "flooding", "mu": 0.1}))


def test_parse_rejects_misplaced_keys():
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(doc(graph={"kind": "ring", "n": 8, "radius": 0.3}))
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(doc(strategy={"kind": "laplacian_reg", "mu": 0.01,
                                   "rho": 1.0}))


def test_parse_smooth_truth_rejects_modes_and_bandwidth():
    bad = doc()
    bad["model"]["truth"] = {"kind": "smooth", "modes": 3, "bandwidth": 1.0}
    with pytest.raises(ConfigError, match="modes or bandwidth"):
        parse_config(bad)


def test_parse_eta_grid():
    cfg = parse_config(doc(eta_grid=[0.0, 0.5, 2]))
    assert cfg.eta_grid == (0.0, 0.5, 2.0)
    with pytest.raises(ConfigError):
        parse_config(doc(eta_grid=[]))
    with pytest.raises(ConfigError):
        parse_config(doc(eta_grid=[-1.0]))


def test_parse_spectral_kernel_spec():
    good = doc(strategy={"kind": "spectral_reg", "mu": 0.01, "eta": 0.5,
                         "kernel": {"kind": "power", "exponent": 2}})
    parse_config(good)
    bad = doc(strategy={"kind": "spectral_reg", "mu": 0.01, "eta": 0.5,
                        "kernel": {"kind": "power"}})
    with pytest.raises(ConfigError, match="missing"):
        parse_config(bad)
    with pytest.raises(ConfigError, match="kernel"):
        parse_config(doc(strategy={"kind": "spectral_reg", "mu": 0.01,
                                   "eta": 0.5, "kernel": "cubic"}))


def test_logistic_model_rejects_noise_var():
    bad = doc(model={"kind": "logistic", "m": 2, "noise_var": 0.1,
                     "truth": {"kind": "smooth", "modes": 3}})
    with pytest.raises(ConfigError, match="noise_var"):
        parse_config(bad)


# ---------------------------------------------------------------------------
# Canonical form and hashing
# ---------------------------------------------------------------------------

def test_hash_ignores_key_order():
    a = parse_config(doc())
    shuffled = dict(reversed(list(doc().items())))
    b = parse_config(shuffled)
    assert a.config_hash() == b.config_hash()


def test_hash_ignores_base_dir(tmp_path):
    a = parse_config(doc())
    b = parse_config(doc(), base_dir=str(tmp_path))
    assert a.config_hash() == b.config_hash()
    assert b.base_dir == str(tmp_path)


def test_hash_changes_with_content():
    a = parse_config(doc())
    b = parse_config(doc(seed=8))
    assert a.config_hash() != b.config_hash()


def test_hash_ignores_execution_knobs(tmp_path):
    # worker count and output location do not touch the numbers
    a = parse_config(doc())
    b = parse_config(doc(parallel=4, out=str(tmp_path)))
    assert a.config_hash() == b.config_hash()
    assert a.canonical_json() != b.canonical_json()


def test_with_overrides():
    cfg = parse_config(doc())
    bumped = cfg.with_overrides(mu=0.05, eta=2.0, seed=99, runs=7)
    assert bumped.strategy["mu"] == 0.05
    assert bumped.strategy["eta"] == 2.0
    assert bumped.seed == 99
    assert bumped.runs == 7
    # untouched fields carry over
    assert bumped.iters == cfg.iters
    with pytest.raises(ConfigError, match="unknown overrides"):
        cfg.with_overrides(gamma=1.0)


def test_load_config_sets_base_dir(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(doc()))
    cfg = load_config(path)
    assert cfg.base_dir == str(tmp_path)


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)


# ---------------------------------------------------------------------------
# Stream namespacing
# ---------------------------------------------------------------------------

def test_data_streams_reproducible_and_distinct():
    a = data_stream(7, run=0, agent=3).standard_normal(8)
    b = data_stream(7, run=0, agent=3).standard_normal(8)
    assert np.array_equal(a, b)
    other_agent = data_stream(7, run=0, agent=4).standard_normal(8)
    other_run = data_stream(7, run=1, agent=3).standard_normal(8)
    other_seed = data_stream(8, run=0, agent=3).standard_normal(8)
    for other in (other_agent, other_run, other_seed):
        assert not np.array_equal(a, other)


def test_setup_streams_independent_of_data_streams():
    setup = setup_stream(7, 0).standard_normal(8)
    data = data_stream(7, run=0, agent=0).standard_normal(8)
    assert not np.array_equal(setup, data)
    assert not np.array_equal(setup_stream(7, 0).standard_normal(8),
                              setup_stream(7, 1).standard_normal(8))


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

def test_resolve_builds_consistent_pieces():
    res = resolve(parse_config(doc()))
    assert res.graph.n_agents == 8
    assert res.model.truth.uniform_size == 2
    assert res.strategy.kind == "laplacian_reg"
    assert np.all(np.diff(res.spectrum.eigenvalues) >= -1e-12)
    th = res.theory
    assert th["msd"] == pytest.approx(
        th["variance"]["total"] + th["bias"]["total"] / 8.0, rel=1e-12)


def test_resolve_deterministic():
    a = resolve(parse_config(doc()))
    b = resolve(parse_config(doc()))
    assert np.array_equal(a.model.truth.as_matrix(), b.model.truth.as_matrix())
    assert np.array_equal(a.graph.adjacency, b.graph.adjacency)


def test_resolve_geometric_graph_seeded():
    cfg = parse_config(doc(graph={"kind": "geometric", "n": 15,
                                  "radius": 0.5}))
    a = resolve(cfg)
    b = resolve(cfg)
    assert np.array_equal(a.graph.adjacency, b.graph.adjacency)
    # the layout responds to the seed, not the data streams
    c = resolve(parse_config(doc(seed=8, graph={"kind": "geometric", "n": 15,
                                                "radius": 0.5})))
    assert not np.array_equal(a.graph.adjacency, c.graph.adjacency)


def test_resolve_file_graph_and_tasks(tmp_path):
    save_graph(ring_graph(6), tmp_path / "net.json")
    field = TaskField.from_matrix(np.random.default_rng(0).standard_normal((6, 2)))
    save_tasks(field, tmp_path / "tasks.json")
    cfg = parse_config(
        doc(graph={"kind": "file", "path": "net.json"},
            model={"kind": "mse", "m": 2, "noise_var": 0.1,
                   "truth": {"kind": "file", "path": "tasks.json"}}),
        base_dir=str(tmp_path),
    )
    res = resolve(cfg)
    assert res.graph.n_agents == 6
    assert np.allclose(res.model.truth.as_matrix(), field.as_matrix())


def test_resolve_missing_graph_file_is_os_error(tmp_path):
    cfg = parse_config(doc(graph={"kind": "file", "path": "missing.json"}),
                       base_dir=str(tmp_path))
    with pytest.raises(OSError):
        resolve(cfg)


def test_resolve_piecewise_truth():
    cfg = parse_config(doc(
        graph={"kind": "ring", "n": 10},
        model={"kind": "mse", "m": 2, "noise_var": 0.1,
               "truth": {"kind": "piecewise", "sizes": [4, 6], "scale": 1.0}},
        strategy={"kind": "clustered", "mu": 0.01, "eta": 0.1,
                  "clusters": [4, 6], "penalty": "l1", "rho": 0.2},
    ))
    mat = resolve(cfg).model.truth.as_matrix()
    assert np.ptp(mat[:4], axis=0).max() == 0.0
    assert np.ptp(mat[4:], axis=0).max() == 0.0
    assert np.max(np.abs(mat[0] - mat[5])) > 0.0


def test_resolve_explicit_truth():
    cfg = parse_config(doc(
        graph={"kind": "ring", "n": 3},
        model={"kind": "mse", "m": 2, "noise_var": 0.1,
               "truth": {"kind": "explicit",
                         "blocks": [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]}},
    ))
    mat = resolve(cfg).model.truth.as_matrix()
    assert np.array_equal(mat, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])


def test_resolve_overlapping_global_truth():
    interests = [[0, 1], [1, 2], [2, 3], [3, 0]]
    cfg = parse_config(doc(
        graph={"kind": "ring", "n": 4},
        model={"kind": "mse", "noise_var": 0.1,
               "truth": {"kind": "global_random", "n_variables": 4,
                         "scale": 1.0}},
        strategy={"kind": "overlapping", "mu": 0.01, "interests": interests},
    ))
    res = resolve(cfg)
    blocks = res.model.truth.blocks
    # agents sharing a variable agree on its value
    assert blocks[0][1] == blocks[1][0]   # variable 1
    assert blocks[1][1] == blocks[2][0]   # variable 2
    assert blocks[3][1] == blocks[0][0]   # variable 0


def test_resolve_rejects_m_mismatch():
    bad = doc()
    bad["model"]["truth"] = {"kind": "explicit", "blocks": [[1.0]] * 8}
    with pytest.raises(ConfigError, match="length"):
        resolve(parse_config(bad))


def test_resolve_rejects_modes_beyond_n():
    bad = doc()
    bad["model"]["truth"] = {"kind": "smooth", "modes": 9}
    with pytest.raises(ConfigError, match="modes"):
        resolve(parse_config(bad))


def test_resolve_noncooperative_theory():
    cfg = parse_config(doc(strategy={"kind": "noncooperative", "mu": 0.01}))
    th = resolve(cfg).theory
    assert th["msd"] == th["msd_nc"]
    assert len(th["msd_nc_per_agent"]) == 8


def test_resolve_consensus_projection_theory():
    cfg = parse_config(doc(
        model={"kind": "mse", "m": 2, "noise_var": 0.1,
               "truth": {"kind": "constant", "scale": 1.0}},
        strategy={"kind": "subspace_projection", "mu": 0.01},
    ))
    th = resolve(cfg).theory
    assert th["msd_projection"] == pytest.approx(th["msd_nc"] / 8.0, rel=1e-12)


def test_resolve_spectral_filter_ratios():
    cfg = parse_config(doc(strategy={"kind": "spectral_reg", "mu": 0.01,
                                     "eta": 1.0,
                                     "kernel": {"kind": "power",
                                                "exponent": 1}}))
    th = resolve(cfg).theory
    ratios = np.array(th["filter_ratios"])
    assert ratios[0] == pytest.approx(1.0)
    assert np.all(np.diff(ratios) <= 1e-15)


def test_config_is_frozen():
    cfg = parse_config(doc())
    with pytest.raises(AttributeError):
        cfg.seed = 10
