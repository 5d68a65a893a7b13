"""Equilibrium predictions, cluster certificates, and attractor classification.

All operations here are pure functions of their inputs and safe to call
concurrently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .dynamics import ModelParams, Trajectory
from .graph import Graph


class InsufficientDataError(RuntimeError):
    """Raised when a trajectory tail is too short for the requested analysis."""


class ActionSpacePoint(NamedTuple):
    """Joint sign configuration (common action, observation signal)."""

    q: int
    q_p: int


@dataclass(frozen=True)
class FixedPoint:
    theta_star: np.ndarray
    p_star: float

    kind = "fixed"


@dataclass(frozen=True)
class LimitCycle:
    period: int  # minimal period, >= 2
    cycle_samples: tuple  # m consecutive (opinion vector, pollution) states

    kind = "cycle"


@dataclass(frozen=True)
class Aperiodic:
    samples: tuple  # bounded reservoir of post-transient (opinions, pollution) states

    kind = "aperiodic"


AttractorClass = Union[FixedPoint, LimitCycle, Aperiodic]


@dataclass(frozen=True)
class ClusterReport:
    """Certificate record for one candidate polarized cluster.

    ``violations`` lists (agent, in_count, out_count, slack) for agents that
    fail the binding condition (the weak one if it fails, otherwise the
    strong one), worst offenders first.  ``worst_strong_slack`` is the
    minimum strong-condition slack over members; it is negative exactly when
    the strong certificate fails.
    """

    members: tuple[int, ...]
    action: int  # common initial action, 0 when mixed
    weakly_robust: bool
    strongly_robust: bool
    violations: tuple[tuple[int, int, int, float], ...] = ()
    mixed_action: bool = False
    worst_strong_slack: float = math.nan

    @property
    def size(self) -> int:
        return len(self.members)


def predicted_opinion_limit(n_i_plus_star: int, n_i: int, q_p_star: int, beta: float) -> float:
    """Opinion limit when the neighbor partition and the signal are stationary.

    (1 - beta) * (2 * n_i_plus_star - n_i) / n_i + beta * q_p_star.
    """
    if not 0 <= n_i_plus_star <= n_i or n_i < 1:
        raise ValueError(
            f"need 0 <= n_i_plus_star <= n_i and n_i >= 1, got {n_i_plus_star}, {n_i}"
        )
    return (1.0 - beta) * (2 * n_i_plus_star - n_i) / n_i + beta * q_p_star


def pollution_equilibrium(n_plus: int, n_minus: int, params: ModelParams) -> float:
    """Pollution equilibrium for a stationary action partition.

    (n_plus * e_max + n_minus * e_min) / (1 - gamma); depends only on how the
    population splits between the two actions.
    """
    return (n_plus * params.e_max + n_minus * params.e_min) / (1.0 - params.gamma)


def pollution_bounds(params: ModelParams, n_agents: int) -> tuple[float, float]:
    """(p_min, p_max): equilibria under unanimous action -1 / +1."""
    return (
        pollution_equilibrium(0, n_agents, params),
        pollution_equilibrium(n_agents, 0, params),
    )


def qp_stationarity_certificate(p_k: float, params: ModelParams, n_agents: int) -> bool:
    """Sufficient condition for the observation signal to be stationary.

    True when the corridor of reachable pollution stays on one side of the
    threshold: either the current pollution and the corridor ceiling p_max
    both sit at or below p_bar, or the current pollution and the corridor
    floor p_min both sit at or above p_bar.  Both clauses compare the bound
    reachable under the corresponding unanimous action against the
    threshold; using the high-emission bound in the second clause would
    break that symmetry and is deliberately not done.
    """
    p_min, p_max = pollution_bounds(params, n_agents)
    return (p_k <= p_max and p_max <= params.p_bar) or (
        p_k >= p_min and p_min >= params.p_bar
    )


def certify_cluster(members, graph: Graph, actions_at_0, beta: float) -> ClusterReport:
    """Evaluate the weak and strong robustness certificates for a vertex set.

    Weak condition per member i: |N_i in A| >= |N_i not in A| - beta/(1-beta) * n_i.
    Strong condition: same with the margin added instead of subtracted.
    At beta = 1 the margin diverges: every same-action set is weakly robust
    and no set is strongly robust.
    """
    mem = tuple(sorted(set(int(m) for m in members)))
    if not mem:
        raise ValueError("cluster must be nonempty")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    actions = np.asarray(actions_at_0)
    for i in mem:
        if not 0 <= i < graph.n_agents:
            raise ValueError(f"member {i} out of range")

    acts = {int(actions[i]) for i in mem}
    if len(acts) != 1:
        return ClusterReport(
            members=mem, action=0, weakly_robust=False, strongly_robust=False,
            mixed_action=True,
        )
    action = acts.pop()

    member_set = set(mem)
    margin_factor = math.inf if beta == 1.0 else beta / (1.0 - beta)
    weak_fails: list[tuple[int, int, int, float]] = []
    strong_fails: list[tuple[int, int, int, float]] = []
    worst_strong = math.inf
    for i in mem:
        n_i = len(graph.neighbors[i])
        inside = sum(1 for j in graph.neighbors[i] if j in member_set)
        outside = n_i - inside
        margin = margin_factor * n_i
        weak_slack = inside - outside + margin
        strong_slack = inside - outside - margin
        worst_strong = min(worst_strong, strong_slack)
        if weak_slack < 0.0:
            weak_fails.append((i, inside, outside, weak_slack))
        if strong_slack < 0.0:
            strong_fails.append((i, inside, outside, strong_slack))

    weakly = not weak_fails
    strongly = not strong_fails
    binding = weak_fails if weak_fails else strong_fails
    violations = tuple(sorted(binding, key=lambda rec: rec[3]))
    return ClusterReport(
        members=mem, action=action, weakly_robust=weakly, strongly_robust=strongly,
        violations=violations, worst_strong_slack=worst_strong,
    )


def same_action_components(actions, graph: Graph, agents=None) -> list[tuple[int, ...]]:
    """Connected components of the same-action subgraph.

    Only agents in ``agents`` (default: all) participate; two participating
    agents are connected when one lists the other as neighbor and both hold
    the same action.  Edges are treated as undirected for connectivity.
    """
    actions = np.asarray(actions)
    pool = set(range(graph.n_agents)) if agents is None else set(int(a) for a in agents)
    seen: set[int] = set()
    components: list[tuple[int, ...]] = []
    for start in sorted(pool):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            i = queue.pop()
            for j in graph.neighbors[i]:
                if j in pool and j not in seen and actions[j] == actions[i]:
                    seen.add(j)
                    comp.append(j)
                    queue.append(j)
        components.append(tuple(sorted(comp)))
    return components


def find_preserved_clusters(trajectory: Trajectory, graph: Graph, beta: float) -> list[ClusterReport]:
    """Certify the maximal constant-action components of a recorded run.

    Agents whose action never changed over the trajectory are partitioned
    into connected components of the same-action subgraph and each component
    is certified; reports come back ordered by smallest member index.
    """
    if trajectory.n_snapshots < 1:
        raise ValueError("trajectory has no snapshots")
    acts = trajectory.actions
    constant = [i for i in range(trajectory.n_agents) if np.all(acts[:, i] == acts[0, i])]
    if not constant:
        return []
    components = same_action_components(acts[0], graph, agents=constant)
    return [certify_cluster(comp, graph, acts[0], beta) for comp in components]


def fs_action_equilibria(params: ModelParams, n_agents: int) -> set[ActionSpacePoint]:
    """Action-space equilibria of the fully synchronized coupled dynamics.

    (1, 1) is an equilibrium iff p_max <= p_bar; (-1, -1) iff p_min >= p_bar.
    The mixed points (1, -1) and (-1, 1) are never equilibria; an empty
    result predicts perpetual switching between the four sign quadrants.
    """
    p_min, p_max = pollution_bounds(params, n_agents)
    out: set[ActionSpacePoint] = set()
    if p_max <= params.p_bar:
        out.add(ActionSpacePoint(1, 1))
    if p_min >= params.p_bar:
        out.add(ActionSpacePoint(-1, -1))
    return out


def fs_escape_bound(beta: float) -> int:
    """Steps a synchronized population can hold action 1 against a frozen -1 signal.

    Returns ceil(1 / (2*beta - 1)), which bounds the switching time whenever
    the common opinion starts at or below (sqrt(5) - 1) / 2: in that range
    every step moves the opinion down by at least 2*beta - 1.  Larger
    starting opinions shrink more slowly at first (the mobility factor
    1 - theta^2 is small near the boundary) and can exceed this bound.
    """
    if beta <= 0.5:
        raise ValueError(f"escape bound requires beta > 1/2, got {beta}")
    return math.ceil(1.0 / (2.0 * beta - 1.0))


def classify_states(thetas: np.ndarray, pollutions: np.ndarray, tol: float = 1e-9,
                    max_period: int = 256) -> AttractorClass:
    """Classify a post-transient tail given stacked state arrays.

    Scans candidate periods in increasing order, so a reported cycle period
    is minimal.  Period 1 (all consecutive states within ``tol`` in max
    norm) is a fixed point; no match up to ``max_period`` is aperiodic.
    """
    if max_period < 1:
        raise ValueError(f"max_period must be positive, got {max_period}")
    thetas = np.asarray(thetas, dtype=np.float64)
    pollutions = np.asarray(pollutions, dtype=np.float64)
    n_tail = thetas.shape[0]
    if n_tail < 2 * max_period:
        raise InsufficientDataError(
            f"tail of {n_tail} samples cannot resolve periods up to {max_period}; "
            f"need at least {2 * max_period}"
        )
    states = np.column_stack([thetas, pollutions])
    for m in range(1, max_period + 1):
        if float(np.max(np.abs(states[m:] - states[:-m]))) < tol:
            if m == 1:
                return FixedPoint(theta_star=thetas[-1].copy(), p_star=float(pollutions[-1]))
            return LimitCycle(
                period=m,
                cycle_samples=tuple(
                    (thetas[n_tail - m + j].copy(), float(pollutions[n_tail - m + j]))
                    for j in range(m)
                ),
            )
    keep = min(n_tail, 256)
    idx = np.unique(np.linspace(0, n_tail - 1, keep).round().astype(int))
    return Aperiodic(
        samples=tuple((thetas[i].copy(), float(pollutions[i])) for i in idx)
    )


def classify_attractor(trajectory_tail: Sequence, tol: float = 1e-9,
                       max_period: int = 256) -> AttractorClass:
    """Classify a tail given as a sequence of (opinion vector, pollution) pairs."""
    thetas = np.asarray([np.asarray(v, dtype=np.float64) for v, _ in trajectory_tail])
    ps = np.asarray([p for _, p in trajectory_tail], dtype=np.float64)
    return classify_states(thetas, ps, tol=tol, max_period=max_period)


def write_cluster_csv(reports: Sequence[ClusterReport], path) -> None:
    """Export cluster certificates: cluster_id,size,action,weak,strong,worst_slack."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "size", "action", "weak", "strong", "worst_slack"])
        for cid, rep in enumerate(reports):
            writer.writerow([
                cid,
                rep.size,
                rep.action,
                int(rep.weakly_robust),
                int(rep.strongly_robust),
                f"{rep.worst_strong_slack:.17g}",
            ])


def write_lattice_grid_csv(trajectory: Trajectory, side: int,
                           reports: Sequence[ClusterReport], path) -> None:
    """Per-cell export of a lattice run: row,col,theta_final,action_final,in_strong_cluster."""
    if side * side != trajectory.n_agents:
        raise ValueError(
            f"side {side} does not match {trajectory.n_agents} agents"
        )
    strong_members: set[int] = set()
    for rep in reports:
        if rep.strongly_robust:
            strong_members.update(rep.members)
    theta_final = trajectory.opinions[-1]
    action_final = trajectory.actions[-1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "theta_final", "action_final", "in_strong_cluster"])
        for r in range(side):
            for c in range(side):
                i = r * side + c
                writer.writerow([
                    r, c, f"{theta_final[i]:.17g}", int(action_final[i]),
                    int(i in strong_members),
                ])
