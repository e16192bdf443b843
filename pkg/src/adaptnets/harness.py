"""Monte Carlo harness: run experiments, aggregate, and persist results.

Runs are independent by construction (per-(run, agent) random streams), so
serial and parallel execution produce bit-identical aggregates: workers are
handed the run index and the canonical config JSON, rebuild the experiment
deterministically, and results are combined in run order.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    data_stream,
    load_config,
    parse_config,
    resolve,
)
from .streaming import draw_horizon

__all__ = [
    "DIVERGENCE_FACTOR",
    "SETTLED_DRIFT",
    "DivergenceError",
    "SteadyState",
    "ExperimentResult",
    "SweepPoint",
    "ComparisonEntry",
    "TheoryComparison",
    "steady_state",
    "run_experiment",
    "eta_sweep",
    "compare_theory",
    "save_result",
    "save_sweep",
]

# A run is abandoned once the network error exceeds this multiple of its
# starting value (floored at 1 so a zero-error start still has a reference).
DIVERGENCE_FACTOR = 1e6

# Largest |slope| * window-span / |mean| ratio still reported as settled.
SETTLED_DRIFT = 0.1

_ENV_PARALLEL = "ADAPTNETS_PARALLEL"


class DivergenceError(RuntimeError):
    """The recursion blew up; step sizes are too aggressive."""

    def __init__(self, iteration: int, value: float, threshold: float,
                 mu: float, eta: float):
        self.iteration = iteration
        self.value = value
        self.threshold = threshold
        super().__init__(
            f"divergence at iteration {iteration}: network error {value:.3e} "
            f"exceeds {threshold:.3e} (mu={mu:g}, eta={eta:g})"
        )


@dataclass(frozen=True)
class SteadyState:
    """Mean over the tail window of a trajectory.

    drift_ratio is |fitted slope| * (window span) / |mean|; a large value
    means the window average is still moving and should not be read as a
    steady-state level.
    """

    value: float
    stderr: float
    n_points: int
    drift_ratio: float

    @property
    def settled(self) -> bool:
        return self.drift_ratio <= SETTLED_DRIFT


def _window_start(n_points: int, fraction: float) -> int:
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must be in (0, 1]")
    return n_points - math.ceil(fraction * n_points)


def _drift_ratio(window: np.ndarray, mean: float) -> float:
    n = window.size
    if n < 2:
        return 0.0
    x = np.arange(n, dtype=float)
    slope = np.polyfit(x, window, 1)[0]
    return float(abs(slope) * (n - 1) / max(abs(mean), np.finfo(float).tiny))


def steady_state(trajectory, fraction: float = 0.1) -> SteadyState:
    """Tail-window mean of a recorded trajectory.

    Parameters
    ----------
    trajectory : array_like
        Either a single trajectory of shape (T,) or a stack of per-run
        trajectories of shape (R, T).
    fraction : float
        The window covers the last ceil(fraction * T) recorded points.

    Returns
    -------
    SteadyState
        For (R, T) input the standard error is taken across the per-run
        window means; for a single trajectory it falls back to the scatter
        of the points inside the window.
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim == 1:
        traj = traj[None, :]
    if traj.ndim != 2 or traj.shape[1] == 0:
        raise ValueError("trajectory must be (T,) or (R, T) with T >= 1")
    n_runs, n_points = traj.shape
    start = _window_start(n_points, fraction)
    window = traj[:, start:]
    per_run = window.mean(axis=1)
    value = float(per_run.mean())
    if n_runs > 1:
        stderr = float(per_run.std(ddof=1) / math.sqrt(n_runs))
    elif window.shape[1] > 1:
        stderr = float(window[0].std(ddof=1) / math.sqrt(window.shape[1]))
    else:
        stderr = 0.0
    drift = _drift_ratio(window.mean(axis=0), value)
    return SteadyState(value=value, stderr=stderr,
                       n_points=int(window.shape[1]), drift_ratio=drift)


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated Monte Carlo output of one experiment."""

    iterations: np.ndarray
    msd_wo: np.ndarray
    msd_wstar: np.ndarray | None
    stderr: np.ndarray
    steady_wo: SteadyState
    steady_wstar: SteadyState | None
    per_agent_msd: np.ndarray
    theory: dict | None
    n_runs: int
    n_agents: int
    seed: int
    config_hash: str
    effective_config: dict
    wall_time: float
    warnings: tuple[str, ...]


def _agent_sq_errors(w, reference, blockwise: bool) -> np.ndarray:
    if blockwise:
        return np.array([float(np.dot(b - r, b - r))
                         for b, r in zip(w, reference)])
    diff = w - reference
    return np.einsum("km,km->k", diff, diff)


def _simulate_run(config_json: str, base_dir: str | None, run: int) -> dict:
    """One Monte Carlo run. Module-level so worker processes can call it.

    base_dir travels separately because the canonical form excludes it (the
    hash must not depend on where the config file lives), yet file-backed
    graphs and tasks still need it to resolve relative paths.
    """
    res = _resolved_from_json(config_json, base_dir)
    cfg = res.config
    strategy, model = res.strategy, res.model
    n = res.graph.n_agents
    horizon, every = cfg.iters, cfg.record_every
    blockwise = strategy.blockwise

    streams = [data_stream(cfg.seed, run, k) for k in range(n)]
    block = draw_horizon(model, streams, horizon)

    if blockwise:
        truth_ref = model.truth.blocks
        wstar_ref = None
    else:
        truth_ref = model.truth.as_matrix()
        wstar_ref = res.w_star

    state = strategy.init_state()
    start_err = _agent_sq_errors(state.w, truth_ref, blockwise)
    threshold = DIVERGENCE_FACTOR * max(float(start_err.mean()), 1.0)

    n_rec = horizon // every
    traj_wo = np.empty(n_rec)
    traj_ws = np.empty(n_rec) if wstar_ref is not None else None
    window_start = horizon - math.ceil(cfg.steady_window * horizon)
    agent_acc = np.zeros(n)
    agent_count = 0

    rec = 0
    for i in range(horizon):
        state = strategy.step(state, model, block.at(i))
        in_window = i >= window_start
        record = (i + 1) % every == 0
        if not (in_window or record):
            continue
        sq = _agent_sq_errors(state.w, truth_ref, blockwise)
        if in_window:
            agent_acc += sq
            agent_count += 1
        if record:
            msd = float(sq.mean())
            traj_wo[rec] = msd
            if traj_ws is not None:
                d2 = state.w - wstar_ref
                traj_ws[rec] = float(np.einsum("km,km->", d2, d2) / n)
            rec += 1
            if not np.isfinite(msd) or msd > threshold:
                raise DivergenceError(i + 1, msd, threshold,
                                      strategy.mu, strategy.eta)
    return {
        "msd_wo": traj_wo,
        "msd_wstar": traj_ws,
        "per_agent": agent_acc / max(agent_count, 1),
    }


@lru_cache(maxsize=8)
def _resolved_from_json(config_json: str, base_dir: str | None):
    return resolve(parse_config(json.loads(config_json), base_dir=base_dir))


def _effective_parallel(config: ExperimentConfig, override: int | None) -> int:
    if override is not None:
        return max(int(override), 1)
    env = os.environ.get(_ENV_PARALLEL)
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ConfigError(f"{_ENV_PARALLEL} must be an integer, got {env!r}")
    return config.parallel


def run_experiment(config: ExperimentConfig | dict | str | os.PathLike,
                   parallel: int | None = None) -> ExperimentResult:
    """Run the configured experiment and aggregate across runs.

    config may be a parsed ExperimentConfig, a raw dict, or a path to a
    JSON file. parallel overrides the config (and the ADAPTNETS_PARALLEL
    environment variable sits between the two). Aggregation is performed
    in fixed run order, so the result does not depend on the worker count.
    """
    if isinstance(config, (str, os.PathLike)):
        config = load_config(config)
    elif isinstance(config, dict):
        config = parse_config(config)
    resolved = resolve(config)  # fail fast on inconsistent configs
    config_json = config.canonical_json()
    n_workers = _effective_parallel(config, parallel)
    t0 = time.perf_counter()
    if n_workers > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=min(n_workers, config.runs)) as ex:
            futures = [ex.submit(_simulate_run, config_json, config.base_dir, r)
                       for r in range(config.runs)]
            per_run = [f.result() for f in futures]
    else:
        per_run = [_simulate_run(config_json, config.base_dir, r)
                   for r in range(config.runs)]
    wall = time.perf_counter() - t0

    runs_wo = np.stack([r["msd_wo"] for r in per_run])
    mean_wo = runs_wo.mean(axis=0)
    if config.runs > 1:
        stderr = runs_wo.std(axis=0, ddof=1) / math.sqrt(config.runs)
    else:
        stderr = np.zeros_like(mean_wo)
    steady_wo = steady_state(runs_wo, config.steady_window)

    msd_wstar = None
    steady_ws = None
    if per_run[0]["msd_wstar"] is not None:
        runs_ws = np.stack([r["msd_wstar"] for r in per_run])
        msd_wstar = runs_ws.mean(axis=0)
        steady_ws = steady_state(runs_ws, config.steady_window)

    per_agent = np.stack([r["per_agent"] for r in per_run]).mean(axis=0)
    iterations = np.arange(1, len(mean_wo) + 1) * config.record_every

    warnings = []
    if not steady_wo.settled:
        warnings.append(
            f"steady-state window still drifting "
            f"(drift_ratio={steady_wo.drift_ratio:.3g}); increase iters"
        )
    return ExperimentResult(
        iterations=iterations,
        msd_wo=mean_wo,
        msd_wstar=msd_wstar,
        stderr=stderr,
        steady_wo=steady_wo,
        steady_wstar=steady_ws,
        per_agent_msd=per_agent,
        theory=resolved.theory,
        n_runs=config.runs,
        n_agents=resolved.graph.n_agents,
        seed=config.seed,
        config_hash=config.config_hash(),
        effective_config=config.canonical(),
        wall_time=wall,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Regularization sweeps
# ---------------------------------------------------------------------------

_SWEEP_KINDS = ("laplacian_reg", "spectral_reg", "prox_l1", "clustered")


@dataclass(frozen=True)
class SweepPoint:
    eta: float
    msd_sim: float
    msd_stderr: float
    var_sim: float
    var_stderr: float
    var_theory: float
    bias_theory: float
    settled: bool


def eta_sweep(config: ExperimentConfig | dict,
              etas=None, parallel: int | None = None) -> list[SweepPoint]:
    """Rerun the experiment over a grid of coupling strengths.

    Each grid point reuses the base seed, so the sweep isolates the effect
    of eta from Monte Carlo noise as far as possible.
    """
    if isinstance(config, dict):
        config = parse_config(config)
    if config.strategy["kind"] not in _SWEEP_KINDS:
        raise ConfigError(
            f"eta sweep needs a coupling strategy {_SWEEP_KINDS}, got "
            f"{config.strategy['kind']!r}"
        )
    if config.model["kind"] != "mse":
        raise ConfigError("eta sweep compares against mse steady-state theory")
    grid = tuple(etas) if etas is not None else config.eta_grid
    if not grid:
        raise ConfigError("eta sweep needs eta_grid in the config or explicit etas")
    points = []
    for eta in grid:
        result = run_experiment(config.with_overrides(eta=float(eta)),
                                parallel=parallel)
        theory = result.theory or {}
        var_t = theory.get("variance", {}).get("total", math.nan)
        bias_t = theory.get("bias", {}).get("total", math.nan)
        if result.steady_wstar is not None:
            var_sim = result.steady_wstar.value
            var_se = result.steady_wstar.stderr
        else:
            var_sim, var_se = math.nan, math.nan
        points.append(SweepPoint(
            eta=float(eta),
            msd_sim=result.steady_wo.value,
            msd_stderr=result.steady_wo.stderr,
            var_sim=var_sim,
            var_stderr=var_se,
            var_theory=var_t,
            bias_theory=bias_t,
            settled=result.steady_wo.settled,
        ))
    return points


# ---------------------------------------------------------------------------
# Theory comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonEntry:
    name: str
    simulated: float
    predicted: float
    rel_error: float
    within: bool


@dataclass(frozen=True)
class TheoryComparison:
    entries: tuple[ComparisonEntry, ...]
    tolerance: float
    notes: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(e.within for e in self.entries)


def compare_theory(result: ExperimentResult, tolerance: float = 0.15,
                   predictions: dict | None = None) -> TheoryComparison:
    """Relative agreement between steady-state simulation and predictions.

    Compares the steady network error against the predicted level, and the
    error around the limit point against the variance prediction when both
    are available.
    """
    theory = predictions if predictions is not None else result.theory
    entries = []
    notes = []
    if theory is None:
        notes.append("no closed-form predictions for this configuration")
        theory = {}
    tiny = np.finfo(float).tiny

    def add(name: str, simulated: float, predicted: float):
        rel = abs(simulated - predicted) / max(abs(predicted), tiny)
        entries.append(ComparisonEntry(name, simulated, predicted, rel,
                                       rel <= tolerance))

    if "msd" in theory:
        add("msd", result.steady_wo.value, float(theory["msd"]))
    if "variance" in theory and result.steady_wstar is not None:
        add("variance", result.steady_wstar.value,
            float(theory["variance"]["total"]))
    if not result.steady_wo.settled:
        notes.append("window not settled; comparison may be premature")
    return TheoryComparison(entries=tuple(entries), tolerance=tolerance,
                            notes=tuple(notes))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def _steady_dict(s: SteadyState | None) -> dict | None:
    if s is None:
        return None
    return {"value": s.value, "stderr": s.stderr, "n_points": s.n_points,
            "drift_ratio": s.drift_ratio, "settled": s.settled}


def save_result(result: ExperimentResult, outdir) -> tuple[str, str]:
    """Write result.csv (trajectory) and result.json (summary) to outdir."""
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "result.csv")
    json_path = os.path.join(outdir, "result.json")
    with open(csv_path, "w") as fh:
        fh.write("iter,msd_wo,msd_wstar,stderr\n")
        for i in range(len(result.iterations)):
            wstar = ("" if result.msd_wstar is None
                     else _fmt(result.msd_wstar[i]))
            fh.write(f"{int(result.iterations[i])},{_fmt(result.msd_wo[i])},"
                     f"{wstar},{_fmt(result.stderr[i])}\n")
    doc = {
        "schema": 1,
        "seed": result.seed,
        "config_hash": result.config_hash,
        "n_runs": result.n_runs,
        "n_agents": result.n_agents,
        "wall_time_s": result.wall_time,
        "steady": {
            "msd_wo": _steady_dict(result.steady_wo),
            "msd_wstar": _steady_dict(result.steady_wstar),
            "per_agent_msd": result.per_agent_msd.tolist(),
        },
        "theory": result.theory,
        "warnings": list(result.warnings),
        "config": result.effective_config,
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def save_sweep(points: list[SweepPoint], outdir) -> tuple[str, str]:
    """Write sweep.csv (headline columns) and sweep.json (full detail)."""
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "sweep.csv")
    json_path = os.path.join(outdir, "sweep.json")
    with open(csv_path, "w") as fh:
        fh.write("eta,msd_sim,var_sim,var_theory,bias_theory\n")
        for p in points:
            fh.write(f"{_fmt(p.eta)},{_fmt(p.msd_sim)},{_fmt(p.var_sim)},"
                     f"{_fmt(p.var_theory)},{_fmt(p.bias_theory)}\n")
    best = min(points, key=lambda p: p.msd_sim)
    doc = {
        "schema": 1,
        "argmin_eta": best.eta,
        "min_msd_sim": best.msd_sim,
        "points": [{
            "eta": p.eta, "msd_sim": p.msd_sim, "msd_stderr": p.msd_stderr,
            "var_sim": p.var_sim, "var_stderr": p.var_stderr,
            "var_theory": p.var_theory, "bias_theory": p.bias_theory,
            "settled": p.settled,
        } for p in points],
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
