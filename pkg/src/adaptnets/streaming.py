"""Task fields and streaming data models.

A TaskField assigns one parameter vector per agent. A StreamModel describes
how each agent's observations are generated from its task: linear
regression with additive noise ("mse") or binary logistic observations
("logistic"). Sampling is organized around per-(run, agent) random streams;
a stream yields the regressor draws for a horizon first, then the noise or
label draws, so that single samples and whole-horizon blocks come from the
same well-defined sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .graphs import Spectrum

__all__ = [
    "TaskField",
    "StreamModel",
    "Sample",
    "NetworkSample",
    "SampleBlock",
    "synth_smooth_tasks",
    "mse_sample",
    "logistic_sample",
    "draw_horizon",
    "instantaneous_gradient",
    "sigmoid",
    "save_tasks",
    "load_tasks",
]

_BANDWIDTH_RTOL = 1e-9


def sigmoid(x):
    """Numerically stable logistic function 1 / (1 + exp(-x))."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


# ---------------------------------------------------------------------------
# Task fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaskField:
    """One parameter vector per agent.

    Blocks may differ in length (overlapping-variable scenarios); uniform
    fields expose an (N, M) matrix view.
    """

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = []
        for k, blk in enumerate(self.blocks):
            arr = np.array(blk, dtype=float).ravel()
            if arr.size == 0:
                raise ValueError(f"agent {k} has an empty block")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"agent {k} block has non-finite entries")
            arr.flags.writeable = False
            blocks.append(arr)
        if not blocks:
            raise ValueError("task field needs at least one agent")
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n_agents(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(blk.size for blk in self.blocks)

    @property
    def uniform_size(self) -> int | None:
        sizes = set(self.block_sizes)
        return sizes.pop() if len(sizes) == 1 else None

    def as_matrix(self) -> np.ndarray:
        """Stack blocks into an (N, M) matrix; blocks must have equal length."""
        if self.uniform_size is None:
            raise ValueError("blocks have unequal lengths; no matrix view")
        return np.vstack(self.blocks)

    def stacked(self) -> np.ndarray:
        """Concatenate all blocks into one vector of length sum(M_k)."""
        return np.concatenate(self.blocks)

    @classmethod
    def from_matrix(cls, matrix) -> "TaskField":
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim == 1:
            mat = mat[:, None]
        return cls(tuple(mat[k] for k in range(mat.shape[0])))

    def to_json_dict(self) -> dict:
        if self.uniform_size is None:
            raise ValueError("only uniform task fields serialize to JSON")
        return {
            "M": self.uniform_size,
            "blocks": [blk.tolist() for blk in self.blocks],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TaskField":
        try:
            m = int(doc["M"])
            blocks = doc["blocks"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"task document must have 'M' and 'blocks': {exc}")
        field_ = cls(tuple(np.asarray(b, dtype=float) for b in blocks))
        if field_.uniform_size != m:
            raise ValueError(
                f"declared M={m} does not match block lengths {field_.block_sizes}"
            )
        return field_


def save_tasks(tasks: TaskField, path) -> None:
    with open(path, "w") as fh:
        json.dump(tasks.to_json_dict(), fh, indent=1)
        fh.write("\n")


def load_tasks(path) -> TaskField:
    with open(path) as fh:
        return TaskField.from_json_dict(json.load(fh))


def synth_smooth_tasks(
    spectrum: Spectrum,
    m: int,
    bandwidth: float,
    rng: np.random.Generator,
    scale_fn=None,
) -> TaskField:
    """Draw an exactly bandlimited task field.

    Spectral coefficients for modes with lambda_m <= bandwidth are i.i.d.
    standard normal scaled by scale_fn(lambda_m) (default 1 / (1 + lambda));
    coefficients of higher modes are exactly zero.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if bandwidth < 0.0:
        raise ValueError("bandwidth must be nonnegative")
    lam = spectrum.eigenvalues
    coeffs = rng.standard_normal((spectrum.n_agents, m))
    if scale_fn is None:
        scales = 1.0 / (1.0 + lam)
    else:
        scales = np.asarray(scale_fn(lam), dtype=float)
    coeffs *= scales[:, None]
    cutoff = bandwidth + _BANDWIDTH_RTOL * max(1.0, spectrum.lam_max)
    coeffs[lam > cutoff] = 0.0
    return TaskField.from_matrix(spectrum.eigenvectors @ coeffs)


# ---------------------------------------------------------------------------
# Stream models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StreamModel:
    """Data-generating model shared by the network.

    kind "mse": d_k(i) = u_{k,i}^T w_k^o + v_k(i), regressors Gaussian with
    covariance r_u (or per-agent identity when r_u is None, which also
    covers fields with unequal block sizes), noise variance noise_var per
    agent. noise_var = 0 is the noiseless limit used by convergence checks.

    kind "logistic": labels gamma = +/-1 with P(gamma=1 | h) =
    sigmoid(h^T w_k^o), Gaussian regressors h, ridge coefficient reg >= 0.
    """

    kind: str
    truth: TaskField
    r_u: np.ndarray | None = None
    noise_var: np.ndarray | None = None
    reg: float = 0.0

    def __post_init__(self):
        if self.kind not in ("mse", "logistic"):
            raise ValueError(f"unknown stream model kind {self.kind!r}")
        n = self.truth.n_agents
        if self.r_u is not None:
            r_u = np.array(self.r_u, dtype=float)
            m = self.truth.uniform_size
            if m is None:
                raise ValueError("shared r_u requires uniform block sizes")
            if r_u.shape != (m, m):
                raise ValueError(f"r_u must be ({m}, {m}), got {r_u.shape}")
            if not np.allclose(r_u, r_u.T, atol=1e-12):
                raise ValueError("r_u must be symmetric")
            try:
                np.linalg.cholesky(r_u)
            except np.linalg.LinAlgError:
                raise ValueError("r_u must be positive definite")
            r_u.flags.writeable = False
            object.__setattr__(self, "r_u", r_u)
        if self.kind == "mse":
            if self.noise_var is None:
                raise ValueError("mse model requires noise_var")
            var = np.array(self.noise_var, dtype=float).ravel()
            if var.size == 1:
                var = np.full(n, var[0])
            if var.size != n:
                raise ValueError(f"noise_var must have {n} entries")
            if np.any(var < 0.0) or not np.all(np.isfinite(var)):
                raise ValueError("noise variances must be finite and >= 0")
            var.flags.writeable = False
            object.__setattr__(self, "noise_var", var)
        else:
            if self.reg < 0.0:
                raise ValueError("logistic ridge coefficient must be >= 0")

    @property
    def n_agents(self) -> int:
        return self.truth.n_agents

    @cached_property
    def _chol(self) -> np.ndarray | None:
        return None if self.r_u is None else np.linalg.cholesky(self.r_u)

    def regressor_cov(self, k: int) -> np.ndarray:
        if self.r_u is not None:
            return self.r_u
        return np.eye(self.truth.block_sizes[k])


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    """One agent's observation: (u, d) for mse, (h, gamma) for logistic."""

    regressor: np.ndarray
    response: float


@dataclass(frozen=True)
class NetworkSample:
    """One observation per agent at a single instant.

    regressors is (N, M) for uniform fields, otherwise a tuple of per-agent
    vectors; responses is (N,).
    """

    regressors: np.ndarray | tuple[np.ndarray, ...]
    responses: np.ndarray

    def agent(self, k: int) -> Sample:
        return Sample(np.asarray(self.regressors[k]), float(self.responses[k]))


@dataclass(frozen=True)
class SampleBlock:
    """A whole horizon of network samples.

    regressors is (T, N, M) for uniform fields, else a tuple of per-agent
    (T, M_k) arrays; responses is (T, N).
    """

    regressors: np.ndarray | tuple[np.ndarray, ...]
    responses: np.ndarray

    @property
    def horizon(self) -> int:
        return self.responses.shape[0]

    def at(self, i: int) -> NetworkSample:
        if isinstance(self.regressors, tuple):
            regs = tuple(r[i] for r in self.regressors)
        else:
            regs = self.regressors[i]
        return NetworkSample(regs, self.responses[i])


def _draw_agent_block(
    model: StreamModel, k: int, rng: np.random.Generator, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw `count` samples for agent k: regressors first, then noise/labels."""
    m_k = model.truth.block_sizes[k]
    z = rng.standard_normal((count, m_k))
    chol = model._chol
    regs = z if chol is None else z @ chol.T
    w_o = model.truth.blocks[k]
    if model.kind == "mse":
        noise = rng.standard_normal(count) * np.sqrt(model.noise_var[k])
        resp = regs @ w_o + noise
    else:
        uniform = rng.random(count)
        prob = sigmoid(regs @ w_o)
        resp = np.where(uniform < prob, 1.0, -1.0)
    return regs, resp


def mse_sample(model: StreamModel, k: int, rng: np.random.Generator) -> Sample:
    """Draw one (u, d) pair for agent k from its stream."""
    if model.kind != "mse":
        raise ValueError("mse_sample needs an mse model")
    regs, resp = _draw_agent_block(model, k, rng, 1)
    return Sample(regs[0], float(resp[0]))


def logistic_sample(model: StreamModel, k: int, rng: np.random.Generator) -> Sample:
    """Draw one (h, gamma) pair for agent k from its stream."""
    if model.kind != "logistic":
        raise ValueError("logistic_sample needs a logistic model")
    regs, resp = _draw_agent_block(model, k, rng, 1)
    return Sample(regs[0], float(resp[0]))


def draw_horizon(
    model: StreamModel, streams: Sequence[np.random.Generator], count: int
) -> SampleBlock:
    """Draw `count` instants for every agent, one stream per agent."""
    n = model.n_agents
    if len(streams) != n:
        raise ValueError(f"need {n} streams, got {len(streams)}")
    resp = np.empty((count, n))
    if model.truth.uniform_size is not None:
        m = model.truth.uniform_size
        regs = np.empty((count, n, m))
        for k in range(n):
            regs[:, k, :], resp[:, k] = _draw_agent_block(model, k, streams[k], count)
        return SampleBlock(regs, resp)
    regs_blocks = []
    for k in range(n):
        r_k, resp[:, k] = _draw_agent_block(model, k, streams[k], count)
        regs_blocks.append(r_k)
    return SampleBlock(tuple(regs_blocks), resp)


def instantaneous_gradient(
    model: StreamModel, k: int, w_k: np.ndarray, sample: Sample
) -> np.ndarray:
    """Stochastic gradient of agent k's risk at w_k given one sample.

    mse:      -u (d - u^T w)
    logistic: reg * w - gamma * h * sigmoid(-gamma * h^T w)
    """
    w_k = np.asarray(w_k, dtype=float)
    reg_vec = np.asarray(sample.regressor, dtype=float)
    if model.kind == "mse":
        return -reg_vec * (sample.response - reg_vec @ w_k)
    gamma = sample.response
    return model.reg * w_k - gamma * reg_vec * sigmoid(-gamma * (reg_vec @ w_k))
