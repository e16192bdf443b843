"""Weighted graphs and their spectral machinery.

This module provides the graph-side primitives used by the multitask
strategies and the steady-state theory:

    Graph                 undirected weighted graph (symmetric adjacency)
    Spectrum              Laplacian eigendecomposition with fixed conventions
    SpectralKernel        nonnegative spectral weighting r(lambda)
    Subspace              basis of a constraint subspace (consensus, clusters)
    CombinationMatrix     scalar or block combination weights
    ClusterPartition      contiguous partition of agents into clusters
    FeasibilityReport     outcome of combination-matrix feasibility checks

and the operations

    build_laplacian, smoothness, graph_fourier, inverse_graph_fourier,
    metropolis_weights, laplacian_weights, apply_spectral_kernel,
    chebyshev_fit, consensus_subspace, cluster_subspace, projector,
    check_feasibility

plus generators (ring, star, complete, random geometric) and JSON I/O.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly

__all__ = [
    "Graph",
    "Spectrum",
    "SpectralKernel",
    "Subspace",
    "CombinationMatrix",
    "ClusterPartition",
    "FeasibilityReport",
    "EigensolverError",
    "build_laplacian",
    "smoothness",
    "graph_fourier",
    "inverse_graph_fourier",
    "metropolis_weights",
    "laplacian_weights",
    "apply_spectral_kernel",
    "chebyshev_fit",
    "consensus_subspace",
    "cluster_subspace",
    "projector",
    "check_feasibility",
    "ring_graph",
    "star_graph",
    "complete_graph",
    "random_geometric_graph",
    "load_graph",
    "save_graph",
]

# Numerical tolerances used throughout. The eigendecomposition residual bound
# is relative to ||L||_F; the rank tolerance is relative to the largest
# singular value.
EIG_RESIDUAL_RTOL = 1e-10
RANK_RTOL = 1e-10
SPECTRAL_RADIUS_SLACK = 1e-8
_SYM_ATOL = 1e-12


class EigensolverError(RuntimeError):
    """Raised when the Laplacian eigendecomposition fails or is inaccurate."""


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on agents 0..N-1.

    The adjacency matrix holds the regularization weights c_{kl} >= 0 with
    c_{kl} = c_{lk} and zero diagonal. Neighbor lists exclude the agent
    itself; combination rules that need self-inclusive neighborhoods add the
    agent back explicitly.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.all(np.isfinite(adj)):
            raise ValueError("adjacency entries must be finite")
        scale = np.max(np.abs(adj)) if adj.size else 0.0
        if not np.allclose(adj, adj.T, rtol=0.0, atol=_SYM_ATOL * max(scale, 1.0)):
            raise ValueError("adjacency must be symmetric")
        adj = 0.5 * (adj + adj.T)
        if np.any(np.diag(adj) != 0.0):
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if np.any(adj < 0.0):
            raise ValueError("edge weights must be nonnegative")
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def neighbor_lists(self) -> tuple[np.ndarray, ...]:
        """Indices of neighbors of each agent (self excluded)."""
        return tuple(np.flatnonzero(row) for row in self.adjacency)

    def neighbors(self, k: int) -> np.ndarray:
        return self.neighbor_lists[k]

    @cached_property
    def weighted_degrees(self) -> np.ndarray:
        deg = self.adjacency.sum(axis=1)
        deg.flags.writeable = False
        return deg

    @cached_property
    def is_connected(self) -> bool:
        n = self.n_agents
        if n == 0:
            return True
        seen = np.zeros(n, dtype=bool)
        queue = deque([0])
        seen[0] = True
        while queue:
            k = queue.popleft()
            for l in self.neighbor_lists[k]:
                if not seen[l]:
                    seen[l] = True
                    queue.append(l)
        return bool(seen.all())

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Sequence]) -> "Graph":
        """Build a graph from an edge list [[k, l, weight], ...].

        Each undirected edge appears once; duplicates (in either orientation)
        are rejected.
        """
        adj = np.zeros((n, n))
        for edge in edges:
            if len(edge) != 3:
                raise ValueError(f"edge must be [k, l, weight], got {edge!r}")
            k, l, c = int(edge[0]), int(edge[1]), float(edge[2])
            if not (0 <= k < n and 0 <= l < n):
                raise ValueError(f"edge ({k},{l}) out of range for n={n}")
            if k == l:
                raise ValueError(f"self-loop on agent {k} not allowed")
            if c <= 0.0:
                raise ValueError(f"edge ({k},{l}) must have positive weight")
            if adj[k, l] != 0.0:
                raise ValueError(f"duplicate edge ({k},{l})")
            adj[k, l] = c
            adj[l, k] = c
        return cls(adj)

    def to_json_dict(self) -> dict:
        edges = []
        n = self.n_agents
        for k in range(n):
            for l in range(k + 1, n):
                c = self.adjacency[k, l]
                if c != 0.0:
                    edges.append([k, l, float(c)])
        return {"n": n, "edges": edges}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Graph":
        try:
            n = int(doc["n"])
            edges = doc["edges"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"graph document must have 'n' and 'edges': {exc}")
        return cls.from_edges(n, edges)


def save_graph(graph: Graph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_json_dict(), fh, indent=1)
        fh.write("\n")


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def ring_graph(n: int, weight: float = 1.0) -> Graph:
    """Cycle on n agents with uniform edge weight."""
    if n < 3:
        raise ValueError("ring needs at least 3 agents")
    edges = [[k, (k + 1) % n, weight] for k in range(n)]
    return Graph.from_edges(n, edges)


def star_graph(n: int, weight: float = 1.0) -> Graph:
    """Star on n agents; agent 0 is the hub."""
    if n < 2:
        raise ValueError("star needs at least 2 agents")
    return Graph.from_edges(n, [[0, k, weight] for k in range(1, n)])


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    if n < 2:
        raise ValueError("complete graph needs at least 2 agents")
    adj = weight * (np.ones((n, n)) - np.eye(n))
    return Graph(adj)


def random_geometric_graph(
    n: int,
    radius: float,
    rng: np.random.Generator,
    kernel_width: float | None = None,
    require_connected: bool = True,
    max_tries: int = 100,
) -> Graph:
    """Random geometric graph on the unit square.

    Agents at distance d <= radius are linked with Gaussian-kernel weight
    exp(-d^2 / (2 * kernel_width^2)). kernel_width defaults to radius / 2.

    With require_connected the positions are redrawn (from the same stream)
    until the graph is connected; gives up after max_tries draws.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    width = radius / 2.0 if kernel_width is None else float(kernel_width)
    if width <= 0.0:
        raise ValueError("kernel_width must be positive")
    for _ in range(max_tries):
        pos = rng.random((n, 2))
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        adj = np.where(
            (dist <= radius) & ~np.eye(n, dtype=bool),
            np.exp(-(dist * dist) / (2.0 * width * width)),
            0.0,
        )
        graph = Graph(adj)
        if not require_connected or graph.is_connected:
            return graph
    raise ValueError(
        f"could not draw a connected geometric graph in {max_tries} tries "
        f"(n={n}, radius={radius})"
    )


# ---------------------------------------------------------------------------
# Laplacian spectrum and graph Fourier transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition L = V diag(eigenvalues) V^T of a graph Laplacian.

    Eigenvalues are ascending. Each eigenvector is sign-normalized so that
    its largest-magnitude entry (first index on ties) is positive, which
    makes the decomposition reproducible across runs.
    """

    laplacian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are eigenvectors

    def __post_init__(self):
        for name in ("laplacian", "eigenvalues", "eigenvectors"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr = arr.copy() if arr.flags.writeable else arr
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_agents(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lam_max(self) -> float:
        return float(self.eigenvalues[-1])


def build_laplacian(graph: Graph) -> Spectrum:
    """Form L = diag(C 1) - C and eigendecompose it.

    Raises EigensolverError if the solver fails or the reconstruction
    residual ||L - V diag(lam) V^T||_F exceeds 1e-10 * ||L||_F.
    """
    adj = graph.adjacency
    lap = np.diag(graph.weighted_degrees) - adj
    try:
        lam, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"Laplacian eigendecomposition failed: {exc}")
    # Fixed sign convention: largest-|entry| of each eigenvector positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0.0] = 1.0
    vecs = vecs * signs
    residual = np.linalg.norm(lap - (vecs * lam) @ vecs.T)
    scale = np.linalg.norm(lap)
    if residual > EIG_RESIDUAL_RTOL * max(scale, 1e-300):
        raise EigensolverError(
            f"eigendecomposition residual {residual:.3e} exceeds "
            f"{EIG_RESIDUAL_RTOL:.0e} * ||L||_F = {EIG_RESIDUAL_RTOL * scale:.3e}"
        )
    return Spectrum(laplacian=lap, eigenvalues=lam, eigenvectors=vecs)


def _field_matrix(field, n_agents: int) -> np.ndarray:
    arr = np.asarray(field, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != n_agents:
        raise ValueError(
            f"field must be (N, M) with N={n_agents}, got shape {arr.shape}"
        )
    return arr


def smoothness(field, spectrum: Spectrum) -> float:
    """Quadratic smoothness of a network field.

    Parameters
    ----------
    field : array_like, shape (N, M) or (N,)
        One length-M block per agent; all blocks must have equal length.
    spectrum : Spectrum

    Returns
    -------
    float
        W^T (L x I_M) W. Equals the weighted sum of squared neighbor
        differences and the eigenvalue-weighted sum of squared spectral
        coefficients.
    """
    mat = _field_matrix(field, spectrum.n_agents)
    return float(np.einsum("km,kl,lm->", mat, spectrum.laplacian, mat))


def graph_fourier(field, spectrum: Spectrum) -> np.ndarray:
    """Spectral coefficients of a field: row m is (v_m^T x I_M) W."""
    mat = _field_matrix(field, spectrum.n_agents)
    return spectrum.eigenvectors.T @ mat


def inverse_graph_fourier(coeffs, spectrum: Spectrum) -> np.ndarray:
    mat = _field_matrix(coeffs, spectrum.n_agents)
    return spectrum.eigenvectors @ mat


# ---------------------------------------------------------------------------
# Combination matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombinationMatrix:
    """Combination weights, either scalar (N x N) or block (M_t x M_t).

    block_sizes is None for scalar weights. For block weights it gives the
    per-agent block dimensions, summing to M_t.
    """

    matrix: np.ndarray
    block_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("combination matrix must be square")
        if not np.all(np.isfinite(mat)):
            raise ValueError("combination weights must be finite")
        if self.block_sizes is not None:
            sizes = tuple(int(s) for s in self.block_sizes)
            if any(s <= 0 for s in sizes):
                raise ValueError("block sizes must be positive")
            if sum(sizes) != mat.shape[0]:
                raise ValueError(
                    f"block sizes sum to {sum(sizes)}, matrix is {mat.shape[0]}"
                )
            object.__setattr__(self, "block_sizes", sizes)
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def is_scalar(self) -> bool:
        return self.block_sizes is None

    @property
    def n_agents(self) -> int:
        if self.is_scalar:
            return self.matrix.shape[0]
        return len(self.block_sizes)

    def block_matrix(self, block_sizes: Sequence[int]) -> np.ndarray:
        """Expand to the full M_t x M_t block form.

        Scalar weights expand as A x I_M, which requires a uniform block
        size. Block weights are returned as-is after a size check.
        """
        sizes = tuple(int(s) for s in block_sizes)
        if not self.is_scalar:
            if sizes != self.block_sizes:
                raise ValueError("block sizes do not match combination matrix")
            return self.matrix
        if len(sizes) != self.matrix.shape[0]:
            raise ValueError("block sizes do not match number of agents")
        if len(set(sizes)) != 1:
            raise ValueError("scalar weights need a uniform block size")
        return np.kron(self.matrix, np.eye(sizes[0]))


def metropolis_weights(graph: Graph) -> CombinationMatrix:
    """Metropolis combination rule from self-inclusive neighborhood sizes.

    a_{kl} = 1 / max(n_k, n_l) for neighbors l != k, with n_k = |N_k| + 1,
    and a_{kk} absorbing the remainder. The result is symmetric and doubly
    stochastic. Requires a connected graph.
    """
    if not graph.is_connected:
        raise ValueError("metropolis weights require a connected graph")
    n = graph.n_agents
    sizes = np.array([len(graph.neighbors(k)) + 1 for k in range(n)], dtype=float)
    weights = np.zeros((n, n))
    for k in range(n):
        for l in graph.neighbors(k):
            weights[k, l] = 1.0 / max(sizes[k], sizes[l])
    np.fill_diagonal(weights, 1.0 - weights.sum(axis=1))
    return CombinationMatrix(weights)


def laplacian_weights(graph: Graph, scale: float | None = None) -> CombinationMatrix:
    """Laplacian combination rule A = I - scale * L.

    The default scale 1 / max_k L_kk keeps every entry nonnegative.
    Requires a connected graph.
    """
    if not graph.is_connected:
        raise ValueError("laplacian weights require a connected graph")
    deg = graph.weighted_degrees
    if scale is None:
        scale = 1.0 / float(deg.max())
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    weights = scale * graph.adjacency.copy()
    np.fill_diagonal(weights, 1.0 - scale * deg)
    if np.any(weights < 0.0):
        raise ValueError(f"scale {scale} makes a diagonal entry negative")
    return CombinationMatrix(weights)


# ---------------------------------------------------------------------------
# Spectral kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralKernel:
    """Spectral weighting r(lambda) >= 0, polynomial or fitted.

    Polynomial kernels store ascending monomial coefficients
    (r(lambda) = sum_s coefficients[s] * lambda^s). Kernels built from a
    function via chebyshev_fit keep both the fitted coefficients (which is
    what a distributed implementation evaluates) and the fit error.
    """

    coefficients: np.ndarray
    degree: int
    fit_error: float = 0.0

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float).ravel()
        if coeffs.size == 0:
            raise ValueError("kernel needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("kernel coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "degree", int(coeffs.size - 1))

    @classmethod
    def polynomial(cls, coefficients, spectrum: Spectrum | None = None) -> "SpectralKernel":
        kernel = cls(np.asarray(coefficients, dtype=float), degree=0)
        if spectrum is not None:
            kernel.validate_on(spectrum)
        return kernel

    @classmethod
    def from_function(
        cls,
        r: Callable[[np.ndarray], np.ndarray],
        spectrum: Spectrum,
        degree: int = 5,
    ) -> "SpectralKernel":
        """Polynomial surrogate of r on [0, lam_max] via Chebyshev truncation."""
        coeffs, err = chebyshev_fit(r, degree, spectrum.lam_max)
        kernel = cls(coeffs, degree=degree, fit_error=err)
        kernel.validate_on(spectrum)
        return kernel

    def __call__(self, lam) -> np.ndarray:
        return _poly.polyval(np.asarray(lam, dtype=float), self.coefficients)

    def validate_on(self, spectrum: Spectrum, tol: float = 1e-12) -> None:
        vals = self(spectrum.eigenvalues)
        low = float(np.min(vals))
        if low < -tol * max(1.0, float(np.max(np.abs(vals)))):
            raise ValueError(
                f"kernel is negative on the spectrum (min r(lambda) = {low:.3e})"
            )


def chebyshev_fit(
    r: Callable[[np.ndarray], np.ndarray],
    degree: int,
    lam_max: float,
    n_quad: int = 2048,
    n_grid: int = 1000,
) -> tuple[np.ndarray, float]:
    """Truncated shifted-Chebyshev expansion of r on [0, lam_max].

    Series coefficients are computed by Chebyshev-Gauss quadrature with
    n_quad nodes, truncated at the given degree, then converted to ascending
    monomial coefficients in lambda. Returns (coefficients, max_error) where
    max_error is the max absolute fit error on an n_grid uniform grid.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if lam_max <= 0.0:
        raise ValueError("lam_max must be positive")
    theta = (np.arange(n_quad) + 0.5) * np.pi / n_quad
    lam_nodes = 0.5 * lam_max * (np.cos(theta) + 1.0)
    vals = np.asarray(r(lam_nodes), dtype=float)
    j = np.arange(degree + 1)
    series = (2.0 / n_quad) * np.cos(np.outer(j, theta)) @ vals
    series[0] *= 0.5
    poly = _cheb.Chebyshev(series, domain=[0.0, lam_max]).convert(
        kind=_poly.Polynomial
    )
    coeffs = np.zeros(degree + 1)
    coeffs[: poly.coef.size] = poly.coef
    grid = np.linspace(0.0, lam_max, n_grid)
    err = float(np.max(np.abs(np.asarray(r(grid), dtype=float)
                              - _poly.polyval(grid, coeffs))))
    return coeffs, err


def apply_spectral_kernel(kernel: SpectralKernel, spectrum: Spectrum) -> np.ndarray:
    """Dense r(L) = V diag(r(lambda)) V^T. Kernel must be >= 0 on the spectrum."""
    kernel.validate_on(spectrum)
    vals = kernel(spectrum.eigenvalues)
    vecs = spectrum.eigenvectors
    return (vecs * vals) @ vecs.T


# ---------------------------------------------------------------------------
# Subspaces and projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Full-column-rank basis U (M_t x P) of a constraint subspace."""

    basis: np.ndarray
    block_sizes: tuple[int, ...]
    semi_orthogonal: bool = False

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-D array")
        sizes = tuple(int(s) for s in self.block_sizes)
        if any(s <= 0 for s in sizes):
            raise ValueError("block sizes must be positive")
        if sum(sizes) != basis.shape[0]:
            raise ValueError("block sizes must sum to the basis row count")
        singular = np.linalg.svd(basis, compute_uv=False)
        if singular.size == 0 or singular[-1] <= RANK_RTOL * singular[0]:
            raise ValueError("basis is rank deficient")
        if self.semi_orthogonal:
            gram = basis.T @ basis
            if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-10):
                raise ValueError("basis flagged semi-orthogonal but U^T U != I")
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def n_agents(self) -> int:
        return len(self.block_sizes)


def consensus_subspace(n_agents: int, m: int) -> Subspace:
    """Span of (1/sqrt(N)) (1_N x I_M): all agents share one length-M task."""
    if n_agents < 1 or m < 1:
        raise ValueError("n_agents and m must be positive")
    basis = np.kron(np.ones((n_agents, 1)) / np.sqrt(n_agents), np.eye(m))
    return Subspace(basis, block_sizes=(m,) * n_agents, semi_orthogonal=True)


def cluster_subspace(partition: "ClusterPartition", m: int) -> Subspace:
    """Block-diagonal consensus basis: one shared task per cluster."""
    if m < 1:
        raise ValueError("m must be positive")
    n = partition.n_agents
    basis = np.zeros((n * m, partition.n_clusters * m))
    for q, (start, stop) in enumerate(partition.slices):
        size = stop - start
        block = np.kron(np.ones((size, 1)) / np.sqrt(size), np.eye(m))
        basis[start * m : stop * m, q * m : (q + 1) * m] = block
    return Subspace(basis, block_sizes=(m,) * n, semi_orthogonal=True)


def projector(subspace: Subspace) -> np.ndarray:
    """Orthogonal projector U (U^T U)^{-1} U^T onto the subspace."""
    basis = subspace.basis
    gram = basis.T @ basis
    proj = basis @ np.linalg.solve(gram, basis.T)
    return 0.5 * (proj + proj.T)


@dataclass(frozen=True)
class ClusterPartition:
    """Partition of agents 0..N-1 into contiguous clusters of given sizes."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("cluster sizes must be positive")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    @property
    def n_agents(self) -> int:
        return sum(self.sizes)

    @cached_property
    def slices(self) -> tuple[tuple[int, int], ...]:
        bounds = np.concatenate([[0], np.cumsum(self.sizes)])
        return tuple((int(bounds[q]), int(bounds[q + 1]))
                     for q in range(self.n_clusters))

    @cached_property
    def assignment(self) -> np.ndarray:
        out = np.repeat(np.arange(self.n_clusters), self.sizes)
        out.flags.writeable = False
        return out

    def cluster_of(self, k: int) -> int:
        return int(self.assignment[k])


# ---------------------------------------------------------------------------
# Feasibility of combination matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the combination-matrix feasibility checks.

    The first four flags are the defining constraints (right/left fixed
    subspace, spectral gap, sparsity). semi_convergence tracks the measured
    decay of ||A^i - P_U|| up to the configured power; norms holds those
    values for inspection.
    """

    right_fixed: bool
    left_fixed: bool
    spectral: bool
    sparsity: bool
    semi_convergence: bool
    rho: float
    norms: np.ndarray
    passed: bool

    def failed_constraints(self) -> list[str]:
        names = [
            ("right_fixed", self.right_fixed),
            ("left_fixed", self.left_fixed),
            ("spectral", self.spectral),
            ("sparsity", self.sparsity),
            ("semi_convergence", self.semi_convergence),
        ]
        return [name for name, ok in names if not ok]


def check_feasibility(
    combination: CombinationMatrix,
    subspace: Subspace,
    graph: Graph,
    power: int = 50,
    tol: float = 1e-10,
) -> FeasibilityReport:
    """Verify that combination weights realize a projection-type social step.

    Checks A U = U, U^T A = U^T, rho(A - P_U) < 1 (with slack 1e-8), that
    nonzero blocks respect the graph sparsity (A_{kl} = 0 for l not in
    N_k u {k}), and that ||A^i - P_U|| decays geometrically up to the given
    power.
    """
    sizes = subspace.block_sizes
    block = combination.block_matrix(sizes)
    basis = subspace.basis
    proj = projector(subspace)
    scale = max(1.0, float(np.max(np.abs(block))))

    right = bool(np.max(np.abs(block @ basis - basis)) <= tol * scale)
    left = bool(np.max(np.abs(basis.T @ block - basis.T)) <= tol * scale)

    gap = block - proj
    rho = float(np.max(np.abs(np.linalg.eigvals(gap))))
    spectral = bool(rho <= 1.0 - SPECTRAL_RADIUS_SLACK)

    bounds = np.concatenate([[0], np.cumsum(sizes)])
    sparsity = True
    n = len(sizes)
    for k in range(n):
        allowed = set(graph.neighbors(k).tolist()) | {k}
        for l in range(n):
            if l in allowed:
                continue
            sub = block[bounds[k] : bounds[k + 1], bounds[l] : bounds[l + 1]]
            if np.max(np.abs(sub)) > tol * scale:
                sparsity = False
                break
        if not sparsity:
            break

    norms = np.empty(power)
    acc = np.eye(block.shape[0])
    for i in range(power):
        acc = acc @ block
        norms[i] = np.linalg.norm(acc - proj, ord=2)
    # Endpoint decay test with an order-of-magnitude envelope; per-step norms
    # are reported for closer inspection.
    if norms[0] == 0.0:
        semi = True
    elif rho >= 1.0:
        semi = False
    else:
        semi = bool(norms[-1] <= 10.0 * norms[0] * rho ** (power - 1) + 1e-14)
    norms.flags.writeable = False

    passed = right and left and spectral and sparsity and semi
    return FeasibilityReport(
        right_fixed=right,
        left_fixed=left,
        spectral=spectral,
        sparsity=sparsity,
        semi_convergence=semi,
        rho=rho,
        norms=norms,
        passed=passed,
    )
