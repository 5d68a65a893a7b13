"""Independent oracles shared by the test modules.

These are written as plain loops, deliberately separate from the library's
vectorized implementations, so a test never checks code against itself.
"""

def brute_force_period(states, tol, max_period):
    """Minimal-period scan: try every candidate period at every offset.

    ``states`` is a sequence of 1-D arrays.  Returns 1 for a fixed point,
    the minimal period m in [2, max_period] for a cycle, or None when no
    candidate period matches within ``tol``.
    """
    n = len(states)
    for m in range(1, max_period + 1):
        ok = True
        for i in range(n - m):
            a, b = states[i], states[i + m]
            for x, y in zip(a, b):
                if abs(x - y) >= tol:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return m
    return None


def trichotomy_branch(theta_k, theta_k1, f_k, eq_tol=1e-12):
    """Which monotonicity relation a recorded step satisfies, or None.

    'eq' when the step is stationary at the field value within ``eq_tol``;
    otherwise 'up' / 'down' for the strict sandwich relations.
    """
    if abs(theta_k1 - theta_k) <= eq_tol and abs(theta_k1 - f_k) <= eq_tol:
        return "eq"
    if theta_k < theta_k1 < f_k:
        return "up"
    if theta_k > theta_k1 > f_k:
        return "down"
    return None


def is_boundary_stall(theta_k, theta_k1, f_k):
    """True for the one known float escape from the monotonicity trichotomy.

    Near the boundary the mobility factor 1 - theta^2 collapses, the true
    increment (1 - theta^2)(f - theta) drops below half an ulp of theta,
    and the double-precision iterate parks at a distance up to ~5e-9 from a
    unit-magnitude field.  Stationary step, field at the same boundary,
    opinion within ~1e-7 of it.
    """
    return (
        theta_k1 == theta_k
        and abs(f_k) >= 1.0 - 1e-6
        and abs(f_k - theta_k1) < 1e-7
    )


def count_trichotomy_violations(traj, graph, beta, eq_tol=1e-12):
    """Violations of the step monotonicity trichotomy over a stride-1 trajectory.

    Fields are recomputed from each snapshot with an explicit neighbor loop.
    Returns (tick, agent, theta, theta_next, field) tuples.
    """
    assert traj.recording_stride == 1
    violations = []
    for s in range(traj.n_snapshots - 1):
        qp = int(traj.q_p[s])
        for i in range(traj.n_agents):
            ssum = 0
            for j in graph.neighbors[i]:
                ssum += int(traj.actions[s, j])
            f = (1.0 - beta) * (ssum / len(graph.neighbors[i])) + beta * qp
            th = float(traj.opinions[s, i])
            th1 = float(traj.opinions[s + 1, i])
            if trichotomy_branch(th, th1, f, eq_tol) is None:
                violations.append((int(traj.ticks[s]), i, th, th1, f))
    return violations


def count_preservation_violations(traj, graph, beta):
    """Violations of action preservation under a favorable field sign.

    Checks, on every recorded consecutive step: a nonnegative field with
    action 1 keeps action 1, and a nonpositive field with action -1 keeps
    action -1.
    """
    assert traj.recording_stride == 1
    violations = []
    for s in range(traj.n_snapshots - 1):
        qp = int(traj.q_p[s])
        for i in range(traj.n_agents):
            ssum = 0
            for j in graph.neighbors[i]:
                ssum += int(traj.actions[s, j])
            f = (1.0 - beta) * (ssum / len(graph.neighbors[i])) + beta * qp
            q_now = int(traj.actions[s, i])
            q_next = int(traj.actions[s + 1, i])
            if f >= 0.0 and q_now == 1 and q_next != 1:
                violations.append((int(traj.ticks[s]), i))
            if f <= 0.0 and q_now == -1 and q_next != -1:
                violations.append((int(traj.ticks[s]), i))
    return violations


def fs_flip_time(theta0, beta, q_p=-1, cap=10_000_000):
    """Steps until a synchronized population starting at action 1 switches.

    Scalar reference recursion with the observation signal frozen at q_p.
    """
    theta, q = theta0, 1
    for k in range(1, cap):
        f = (1.0 - beta) * q + beta * q_p
        theta = theta + (1.0 - theta * theta) * (f - theta)
        q = 1 if theta > 0 else (-1 if theta < 0 else q)
        if q == -1:
            return k
    raise AssertionError("no flip within cap")
