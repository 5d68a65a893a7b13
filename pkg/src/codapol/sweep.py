"""Parameter sweeps: bifurcation datasets and attractor galleries.

Grid points are independent experiments sharing one graph and one initial
state.  For throughput the sweep engine advances many grid points in one
vectorized batch; every elementwise operation matches the single-run engine
in :mod:`codapol.dynamics`, so batch results are bitwise identical to
running each point alone, regardless of chunking or thread count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .analysis import AttractorClass, classify_states
from .dynamics import ModelParams, Trajectory, initial_state, random_opinions, simulate
from .graph import Graph, GraphSpec


class SweepError(RuntimeError):
    """A single grid point failed; the offending value is named in the message."""


@dataclass(frozen=True)
class FSInit:
    """Fully synchronized start: every agent at theta0, pollution at p0."""

    theta0: float
    p0: float


@dataclass(frozen=True)
class RandomInit:
    """Seeded i.i.d. uniform opinions on (-1, 1), pollution at p0."""

    seed: int
    p0: float


InitSpec = Union[FSInit, RandomInit]

SWEEPABLE = ("beta", "gamma", "p_bar")


@dataclass(frozen=True)
class SweepSpec:
    """One bifurcation experiment: a grid of values for one swept parameter."""

    base_params: ModelParams
    swept_param: str
    grid: tuple[float, ...]
    initial: InitSpec
    graph_spec: GraphSpec
    transient: int = 10_000
    tail: int = 1024
    tol: float = 1e-9
    max_period: int = 256

    def __post_init__(self):
        if self.swept_param not in SWEEPABLE:
            raise ValueError(
                f"swept_param must be one of {SWEEPABLE}, got {self.swept_param!r}"
            )
        grid = tuple(float(v) for v in self.grid)
        object.__setattr__(self, "grid", grid)
        for a, b in zip(grid, grid[1:]):
            if not a < b:
                raise ValueError("grid values must be strictly increasing")
        for v in grid:
            self.params_at(v)  # raises if the substituted value is invalid
        if self.transient < 0:
            raise ValueError(f"transient must be nonnegative, got {self.transient}")
        if self.tail < 1:
            raise ValueError(f"tail must be positive, got {self.tail}")

    def params_at(self, value: float) -> ModelParams:
        return replace(self.base_params, **{self.swept_param: value})


@dataclass(frozen=True)
class SweepRow:
    """One scatter column of the bifurcation diagram.

    For fully synchronized sweeps ``opinion_samples`` holds agent 0's
    opinion per tail tick (all agents are equal); otherwise it holds
    (min, mean, max) of the opinion vector per tail tick, shape [tail, 3].
    """

    param_value: float
    attractor: AttractorClass
    opinion_samples: np.ndarray
    p_samples: np.ndarray

    @property
    def is_fs(self) -> bool:
        return self.opinion_samples.ndim == 1

    def scatter_thetas(self) -> np.ndarray:
        """Per-sample scalar opinion for scatter export (mean when not FS)."""
        return self.opinion_samples if self.is_fs else self.opinion_samples[:, 1]


def _initial_opinions(spec: SweepSpec, graph: Graph) -> np.ndarray:
    if isinstance(spec.initial, FSInit):
        return np.full(graph.n_agents, spec.initial.theta0, dtype=np.float64)
    return random_opinions(spec.initial.seed, graph.n_agents)


def _validate_initial(spec: SweepSpec, graph: Graph, opinions: np.ndarray) -> None:
    if isinstance(spec.initial, FSInit) and spec.graph_spec.kind != "complete":
        raise ValueError(
            "a fully synchronized initial state requires a complete graph"
        )
    for i, th in enumerate(opinions):
        if th == 0.0 or abs(th) >= 1.0:
            raise ValueError(f"agent {i} has illegal initial opinion {th}")
    for v in spec.grid:
        if spec.initial.p0 == spec.params_at(v).p_bar:
            raise ValueError(
                f"grid value {v!r}: initial pollution sits exactly on the threshold"
            )


def _run_chunk(spec: SweepSpec, graph: Graph, opinions0: np.ndarray,
               values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Advance a batch of grid points; returns tail states [P, tail, N] and [P, tail]."""
    n_pts = len(values)
    n = graph.n_agents
    plist = [spec.params_at(v) for v in values]
    beta = np.array([pp.beta for pp in plist])[:, None]
    gamma = np.array([pp.gamma for pp in plist])
    e_min = np.array([pp.e_min for pp in plist])
    e_max = np.array([pp.e_max for pp in plist])
    p_bar = np.array([pp.p_bar for pp in plist])

    theta = np.tile(opinions0, (n_pts, 1))
    p = np.full(n_pts, spec.initial.p0, dtype=np.float64)
    q = np.where(theta > 0.0, 1, -1)
    qp = np.where(p > p_bar, -1, 1)

    flat = graph.flat_neighbors
    indptr = graph.indptr[:-1]
    degrees = graph.degrees

    tail_theta = np.empty((n_pts, spec.tail, n), dtype=np.float64)
    tail_p = np.empty((n_pts, spec.tail), dtype=np.float64)

    total_steps = spec.transient + spec.tail
    for k in range(total_steps):
        sums = np.add.reduceat(q[:, flat], indptr, axis=1)
        f = (1.0 - beta) * (sums / degrees) + beta * qp[:, None]
        theta_new = theta + (1.0 - theta * theta) * (f - theta)
        n_plus = np.count_nonzero(q == 1, axis=1)
        total_e = n_plus * e_max + (n - n_plus) * e_min
        p_new = gamma * p + total_e
        q = np.where(theta_new > 0.0, 1, np.where(theta_new < 0.0, -1, q))
        qp = np.where(p_new > p_bar, -1, np.where(p_new < p_bar, 1, qp))
        theta, p = theta_new, p_new
        if k >= spec.transient:
            j = k - spec.transient
            tail_theta[:, j, :] = theta
            tail_p[:, j] = p
    return tail_theta, tail_p


def _rows_from_tails(spec: SweepSpec, values: Sequence[float],
                     tail_theta: np.ndarray, tail_p: np.ndarray,
                     fs: bool) -> list[SweepRow]:
    rows = []
    for j, v in enumerate(values):
        try:
            attractor = classify_states(
                tail_theta[j], tail_p[j], tol=spec.tol, max_period=spec.max_period
            )
        except Exception as exc:
            raise SweepError(f"grid value {v!r}: {exc}") from exc
        if fs:
            samples = tail_theta[j, :, 0].copy()
        else:
            samples = np.column_stack([
                tail_theta[j].min(axis=1),
                tail_theta[j].mean(axis=1),
                tail_theta[j].max(axis=1),
            ])
        rows.append(SweepRow(
            param_value=float(v),
            attractor=attractor,
            opinion_samples=samples,
            p_samples=tail_p[j].copy(),
        ))
    return rows


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    """Run every grid point and classify its long-run behavior.

    Output order matches the grid.  Results are bitwise deterministic for a
    fixed spec and do not depend on ``threads``.
    """
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    if not spec.grid:
        return []
    graph = spec.graph_spec.build()
    opinions0 = _initial_opinions(spec, graph)
    _validate_initial(spec, graph, opinions0)
    fs = isinstance(spec.initial, FSInit)

    n_pts = len(spec.grid)
    n_chunks = min(threads, n_pts)
    bounds = np.linspace(0, n_pts, n_chunks + 1).astype(int)
    chunks = [spec.grid[bounds[c]:bounds[c + 1]] for c in range(n_chunks)]

    if n_chunks == 1:
        tails = [_run_chunk(spec, graph, opinions0, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=n_chunks) as pool:
            tails = list(pool.map(
                lambda vals: _run_chunk(spec, graph, opinions0, vals), chunks
            ))

    rows: list[SweepRow] = []
    for vals, (tth, tp) in zip(chunks, tails):
        rows.extend(_rows_from_tails(spec, vals, tth, tp, fs))
    return rows


def attractor_gallery(betas: Sequence[float], base: SweepSpec
                      ) -> list[tuple[float, Trajectory, AttractorClass]]:
    """Full stride-1 trajectories for phase-plane plots, with classification.

    Each entry simulates transient + tail ticks at one beta (other
    parameters from ``base``) and classifies the tail.
    """
    graph = base.graph_spec.build()
    opinions0 = _initial_opinions(base, graph)
    if isinstance(base.initial, FSInit) and base.graph_spec.kind != "complete":
        raise ValueError("a fully synchronized initial state requires a complete graph")
    entries = []
    for b in betas:
        try:
            params = replace(base.base_params, beta=float(b))
            state0 = initial_state(opinions0, base.initial.p0, params)
            traj = simulate(state0, graph, params, base.transient + base.tail, stride=1)
            attractor = classify_states(
                traj.opinions[-base.tail:], traj.pollution[-base.tail:],
                tol=base.tol, max_period=base.max_period,
            )
        except Exception as exc:
            raise SweepError(f"grid value {b!r}: {exc}") from exc
        entries.append((float(b), traj, attractor))
    return entries


def write_bifurcation_csv(rows: Sequence[SweepRow], path) -> None:
    """Export scatter data: param_value,class,period,sample_index,theta_sample,p_sample."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "param_value", "class", "period", "sample_index", "theta_sample", "p_sample",
        ])
        for row in rows:
            kind = row.attractor.kind
            period = str(row.attractor.period) if kind == "cycle" else ""
            thetas = row.scatter_thetas()
            for s in range(thetas.shape[0]):
                writer.writerow([
                    f"{row.param_value:.17g}", kind, period, s,
                    f"{thetas[s]:.17g}", f"{row.p_samples[s]:.17g}",
                ])


def write_gallery_csv(entries: Sequence[tuple[float, Trajectory, AttractorClass]],
                      path) -> None:
    """Export gallery trajectories: beta,tick,theta,p,class (agent-0 opinion)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "tick", "theta", "p", "class"])
        for beta, traj, attractor in entries:
            kind = attractor.kind
            for s in range(traj.n_snapshots):
                writer.writerow([
                    f"{beta:.17g}", int(traj.ticks[s]),
                    f"{traj.opinions[s, 0]:.17g}", f"{traj.pollution[s]:.17g}", kind,
                ])
