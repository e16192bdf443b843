"""Command-line frontend.

Subcommands: run, theory, sweep, gen-graph, gen-tasks, check. JSON results
go to standard output; progress and errors go to standard error. Exit codes:
0 success, 2 invalid configuration, 3 divergence, 4 I/O failure, 5 failed
self-check.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    resolve,
    resolve_pieces,
    setup_stream,
    _strategy_payload,
)
from .graphs import (
    check_feasibility,
    apply_spectral_kernel,
    cluster_subspace,
    consensus_subspace,
    metropolis_weights,
    save_graph,
)
from .harness import (
    DivergenceError,
    eta_sweep,
    run_experiment,
    save_result,
    save_sweep,
)
from .streaming import save_tasks
from .strategies import (
    ClusterPartition,
    InterestMap,
    _edge_regularizer_from,
    _resolve_combination,
    cluster_metropolis,
    overlap_metropolis,
    social_clustered,
    social_diffusion,
    social_overlapping,
    social_prox_l1,
    social_smooth,
    social_spectral,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4
EXIT_CHECK = 5


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _print_json(doc) -> None:
    json.dump(doc, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    sys.stdout.flush()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptnets",
        description="Distributed streaming multitask learning over graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=False):
        p.add_argument("--config", required=True, help="experiment JSON path")
        p.add_argument("--out", required=out_required,
                       help="output directory (or file for gen-*)")
        p.add_argument("--seed", type=int, help="override base seed")
        p.add_argument("--mu", type=float, help="override step size")
        p.add_argument("--eta", type=float, help="override coupling strength")
        p.add_argument("--iters", type=int, help="override horizon")
        p.add_argument("--runs", type=int, help="override run count")
        p.add_argument("--parallel", type=int, help="worker processes")
        p.add_argument("--json", action="store_true",
                       help="print a JSON summary to stdout")

    add_common(sub.add_parser("run", help="run an experiment, write CSV+JSON"))
    add_common(sub.add_parser("theory", help="print closed-form predictions"))
    add_common(sub.add_parser("sweep", help="sweep the coupling strength"))
    add_common(sub.add_parser("gen-graph", help="generate the graph to a file",),
               out_required=True)
    add_common(sub.add_parser("gen-tasks", help="generate the tasks to a file"),
               out_required=True)
    add_common(sub.add_parser("check", help="structural self-checks"))
    return parser


def _load_with_overrides(args) -> ExperimentConfig:
    config = load_config(args.config)
    return config.with_overrides(seed=args.seed, mu=args.mu, eta=args.eta,
                                 iters=args.iters, runs=args.runs,
                                 parallel=args.parallel)


def _cmd_run(args) -> int:
    config = _load_with_overrides(args)
    outdir = args.out or config.out
    if outdir is None:
        raise ConfigError("run needs --out or an 'out' entry in the config")
    result = run_experiment(config, parallel=args.parallel)
    csv_path, json_path = save_result(result, outdir)
    for warning in result.warnings:
        _info(f"warning: {warning}")
    _info(f"wrote {csv_path} and {json_path} "
          f"({result.n_runs} runs, {result.wall_time:.2f}s)")
    if args.json:
        _print_json({
            "csv": csv_path, "json": json_path,
            "steady_msd_wo": result.steady_wo.value,
            "steady_msd_wo_stderr": result.steady_wo.stderr,
            "config_hash": result.config_hash,
        })
    return EXIT_OK


def _cmd_theory(args) -> int:
    config = _load_with_overrides(args)
    resolved = resolve(config)
    if resolved.theory is None:
        raise ConfigError(
            "closed-form predictions need an mse model with a shared "
            "regressor covariance"
        )
    _print_json(resolved.theory)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_with_overrides(args)
    outdir = args.out or config.out
    if outdir is None:
        raise ConfigError("sweep needs --out or an 'out' entry in the config")
    points = eta_sweep(config, parallel=args.parallel)
    csv_path, json_path = save_sweep(points, outdir)
    best = min(points, key=lambda p: p.msd_sim)
    _info(f"wrote {csv_path} and {json_path}; "
          f"min msd {best.msd_sim:.4e} at eta={best.eta:g}")
    if args.json:
        _print_json({"csv": csv_path, "json": json_path,
                     "argmin_eta": best.eta, "min_msd_sim": best.msd_sim})
    return EXIT_OK


def _cmd_gen_graph(args) -> int:
    config = _load_with_overrides(args)
    graph, _, _ = resolve_pieces(config)
    save_graph(graph, args.out)
    _info(f"wrote {args.out} ({graph.n_agents} agents, "
          f"{len(graph.to_json_dict()['edges'])} edges)")
    if args.json:
        _print_json({"path": args.out, "n_agents": graph.n_agents})
    return EXIT_OK


def _cmd_gen_tasks(args) -> int:
    config = _load_with_overrides(args)
    _, _, model = resolve_pieces(config)
    save_tasks(model.truth, args.out)
    _info(f"wrote {args.out} ({model.truth.n_agents} blocks)")
    if args.json:
        _print_json({"path": args.out, "n_agents": model.truth.n_agents})
    return EXIT_OK


# ---------------------------------------------------------------------------
# check: structural invariants at tiny scale on the configured experiment
# ---------------------------------------------------------------------------

def _scalar_prox_oracle(anchor, neighbors, weights, gamma, lo, hi):
    """Golden-section minimum of 0.5(x-a)^2 + gamma * sum w|x - v|."""

    def objective(x):
        return 0.5 * (x - anchor) ** 2 + gamma * float(
            np.sum(weights * np.abs(x - neighbors))
        )

    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(200):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)


def _run_checks(config: ExperimentConfig) -> list[tuple[str, bool, str]]:
    graph, spectrum, model = resolve_pieces(config)
    spec = config.strategy
    kind = spec["kind"]
    mu = float(spec["mu"])
    eta = float(spec.get("eta", 0.0))
    n = graph.n_agents
    m = model.truth.uniform_size
    rng = np.random.default_rng(0)
    checks: list[tuple[str, bool, str]] = []

    def add(name: str, passed: bool, detail: str = ""):
        checks.append((name, bool(passed), detail))

    lam_max = float(spectrum.eigenvalues[-1])
    residual = np.linalg.norm(
        spectrum.laplacian @ spectrum.eigenvectors
        - spectrum.eigenvectors * spectrum.eigenvalues
    )
    add("spectrum_residual", residual <= 1e-10 * max(1.0, lam_max) * n,
        f"residual={residual:.2e}")

    if m is None and kind != "overlapping":
        add("uniform_blocks", False, "strategy needs uniform block sizes")
        return checks
    psi = rng.standard_normal((n, m)) if m is not None else None

    if kind == "noncooperative":
        add("identity_step", True, "no social coupling to check")
    elif kind == "laplacian_reg":
        dense = psi - mu * eta * (spectrum.laplacian @ psi)
        got = social_smooth(psi, graph, mu * eta)
        err = float(np.max(np.abs(got - dense)))
        add("smooth_matches_dense", err <= 1e-12, f"max_err={err:.2e}")
        add("stability", mu * eta <= 2.0 / lam_max + 1e-12,
            f"mu*eta={mu * eta:g}, bound={2.0 / lam_max:g}")
    elif kind == "spectral_reg":
        payload = _strategy_payload(spec, graph, spectrum)
        kernel = payload["kernel"]
        values = kernel(spectrum.eigenvalues)
        add("kernel_nonnegative", bool(np.all(values >= -1e-12)),
            f"min={float(values.min()):.2e}")
        dense = psi - mu * eta * (apply_spectral_kernel(kernel, spectrum) @ psi)
        got = social_spectral(psi, graph, kernel.coefficients, mu * eta)
        denom = max(float(np.max(np.abs(dense))), 1.0)
        err = float(np.max(np.abs(got - dense))) / denom
        add("recursion_matches_dense", err <= 1e-9, f"rel_err={err:.2e}")
        linear = social_spectral(psi, graph, (0.0, 1.0), mu * eta)
        smooth = social_smooth(psi, graph, mu * eta)
        add("linear_kernel_reduces_to_smooth",
            bool(np.array_equal(linear, smooth)), "bitwise")
        r_max = float(np.max(values))
        add("stability", mu * eta * r_max <= 2.0 + 1e-12,
            f"mu*eta*max_r={mu * eta * r_max:g}")
    elif kind == "prox_l1":
        payload = _strategy_payload(spec, graph, spectrum)
        regularizer = _edge_regularizer_from(payload.get("rho"), graph, "l1")
        weights = regularizer.weights
        got = social_prox_l1(psi, graph, regularizer, mu * eta)
        worst = 0.0
        for k in range(n):
            nbrs = np.flatnonzero(weights[k])
            if nbrs.size == 0:
                continue
            for j in range(m):
                span = float(np.max(np.abs(
                    np.append(psi[nbrs, j], psi[k, j])))) + 1.0
                ref = _scalar_prox_oracle(psi[k, j], psi[nbrs, j],
                                          weights[k, nbrs], mu * eta,
                                          -span, span)
                worst = max(worst, abs(ref - got[k, j]))
        add("prox_matches_scalar_search", worst <= 1e-6,
            f"max_err={worst:.2e}")
        same = social_prox_l1(np.ones((n, m)), graph, regularizer, mu * eta)
        add("prox_fixed_point_on_agreement",
            float(np.max(np.abs(same - 1.0))) <= 1e-12, "all-equal input")
    elif kind == "diffusion":
        combo = _resolve_combination(spec.get("weights", "metropolis"), graph)
        a = combo.matrix
        col = float(np.max(np.abs(a.sum(axis=0) - 1.0)))
        row = float(np.max(np.abs(a.sum(axis=1) - 1.0)))
        add("doubly_stochastic", max(col, row) <= 1e-10,
            f"max_dev={max(col, row):.2e}")
        report = check_feasibility(combo, consensus_subspace(n, 1), graph)
        add("semi_convergent", report.spectral and report.semi_convergence,
            f"rho={report.rho:.6f}")
        mean_before = psi.mean(axis=0)
        mean_after = social_diffusion(psi, a).mean(axis=0)
        drift = float(np.max(np.abs(mean_after - mean_before)))
        add("mean_preserved", drift <= 1e-10, f"drift={drift:.2e}")
    elif kind == "subspace_projection":
        payload = _strategy_payload(spec, graph, spectrum)
        sub_spec = payload.get("subspace", "consensus")
        if sub_spec == "consensus":
            subspace = consensus_subspace(n, m)
            default_weights = metropolis_weights(graph)
        else:
            subspace = cluster_subspace(sub_spec, m)
            default_weights = cluster_metropolis(graph, sub_spec)
        combo = (_resolve_combination(payload["weights"], graph)
                 if "weights" in payload else default_weights)
        report = check_feasibility(combo, subspace, graph)
        for name in ("right_fixed", "left_fixed", "spectral", "sparsity",
                     "semi_convergence"):
            add(f"feasibility_{name}", getattr(report, name),
                f"rho={report.rho:.6f}" if name == "spectral" else "")
    elif kind == "overlapping":
        interest = InterestMap(
            max(v for row in spec["interests"] for v in row) + 1,
            tuple(tuple(v) for v in spec["interests"]),
        )
        var_weights = overlap_metropolis(graph, interest)
        ok = True
        detail = ""
        for j, weights in var_weights.items():
            dev = float(np.max(np.abs(weights.sum(axis=1) - 1.0)))
            if dev > 1e-10:
                ok = False
                detail = f"variable {j}: row-sum dev {dev:.2e}"
                break
        add("per_variable_row_stochastic", ok, detail)
        shared = rng.standard_normal(interest.n_variables)
        agreed = interest.blocks_from_global(shared)
        out = social_overlapping(agreed, interest, var_weights)
        worst = max(float(np.max(np.abs(o - a)))
                    for o, a in zip(out, agreed))
        add("agreement_fixed_point", worst <= 1e-12, f"max_dev={worst:.2e}")
    elif kind == "clustered":
        partition = ClusterPartition(tuple(spec["clusters"]))
        combo = (cluster_metropolis(graph, partition)
                 if "weights" not in spec
                 else _resolve_combination(spec["weights"], graph))
        a = combo.matrix
        mask = np.zeros((n, n), dtype=bool)
        for start, stop in partition.slices:
            mask[start:stop, start:stop] = True
        leak = float(np.max(np.abs(a[~mask]))) if (~mask).any() else 0.0
        add("block_diagonal_weights", leak <= 1e-14, f"leak={leak:.2e}")
        col = float(np.max(np.abs(a.sum(axis=0) - 1.0)))
        row = float(np.max(np.abs(a.sum(axis=1) - 1.0)))
        add("doubly_stochastic", max(col, row) <= 1e-10,
            f"max_dev={max(col, row):.2e}")
        got = social_clustered(psi, partition, a, None, 0.0)
        plain = social_diffusion(psi, a)
        err = float(np.max(np.abs(got - plain)))
        add("reduces_to_diffusion", err == 0.0, f"max_err={err:.2e}")
    return checks


def _cmd_check(args) -> int:
    config = _load_with_overrides(args)
    checks = _run_checks(config)
    all_pass = all(passed for _, passed, _ in checks)
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        _info(f"check {name}: {status}{suffix}")
    if args.json:
        _print_json({
            "passed": all_pass,
            "checks": [{"name": name, "passed": passed, "detail": detail}
                       for name, passed, detail in checks],
        })
    if not all_pass:
        failed = [name for name, passed, _ in checks if not passed]
        _err(f"check failed: {', '.join(failed)}")
        return EXIT_CHECK
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "theory": _cmd_theory,
    "sweep": _cmd_sweep,
    "gen-graph": _cmd_gen_graph,
    "gen-tasks": _cmd_gen_tasks,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on bad usage; keep main() returning instead so
        # in-process callers see the code rather than an exception
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except DivergenceError as exc:
        _err(f"divergence: {exc}")
        return EXIT_DIVERGENCE
    except ValueError as exc:
        # ConfigError and validation errors raised below it
        _err(f"config: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"io: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
