"""Explicit bicharacteristic flow on the boundary contact space over S^1.

For n = 2 the symbol is p = nu^2 + mu^2 + V0(theta) - sigma and the
Legendre field reads

    W = 2 mu d_theta + (2 mu^2 - p) d_nu + (-2 nu mu - V0'(theta)) d_mu,

so on the shell {p = 0} the variable nu is nondecreasing.  Radial points
sit over critical points of V0 at nu = +-sqrt(sigma - V0); forward
trajectories seeded along unstable directions of saddles witness the
heteroclinic partial order, aggregated into a DAG and totally ordered by
the microlocal Morse construction (descending nu, minima last on ties).

Trigonometric potentials are given as coefficient rows (k, a_k, b_k)
meaning V0(theta) = sum a_k cos(k theta) + b_k sin(k theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .parallel import parallel_map
from .radial import CriticalPointSpec, RadialPoint, classify_radial, linearization_spectrum

DEFAULT_FLOW_TOL = 1e-10
DEFAULT_BALL_RADIUS = 1e-3
DEFAULT_W_STOP = 1e-6
DEFAULT_HOLD_TIME = 5.0


class ChartDomainError(ValueError):
    pass


class ThresholdEnergyError(ValueError):
    """sigma is (numerically) a critical value of V0."""


class NotMorseError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialModel:
    """A trigonometric potential on S^1 (n = 2).

    The two-chart stereographic S^2 case (n = 3) is not implemented; the
    abstract critical-point pipeline covers higher dimensions.
    """

    n: int
    v0_coeffs: tuple  # rows (k, a_k, b_k)

    def __post_init__(self):
        if self.n != 2:
            raise NotImplementedError(
                "explicit flows are implemented for n = 2 (S^1); use the abstract "
                "critical-point pipeline for other dimensions")
        object.__setattr__(self, "v0_coeffs", tuple(tuple(row) for row in self.v0_coeffs))

    def v0(self, theta: float) -> float:
        return sum(a * math.cos(k * theta) + b * math.sin(k * theta)
                   for k, a, b in self.v0_coeffs)

    def v0_prime(self, theta: float) -> float:
        return sum(-a * k * math.sin(k * theta) + b * k * math.cos(k * theta)
                   for k, a, b in self.v0_coeffs)

    def v0_second(self, theta: float) -> float:
        return sum(-a * k * k * math.cos(k * theta) - b * k * k * math.sin(k * theta)
                   for k, a, b in self.v0_coeffs)

    def to_json_dict(self) -> dict:
        return {"n": self.n, "v0": [list(row) for row in self.v0_coeffs]}


@dataclass(frozen=True)
class ContactPoint:
    chart: str
    y: tuple[float, ...]
    nu: float
    mu: tuple[float, ...]

    @property
    def theta(self) -> float:
        return self.y[0]

    def state(self) -> np.ndarray:
        return np.array([*self.y, self.nu, *self.mu])


def symbol_value(pm: PotentialModel, sigma: float, pt: ContactPoint) -> float:
    return pt.nu ** 2 + sum(m * m for m in pt.mu) + pm.v0(pt.theta) - sigma


def on_shell(pm: PotentialModel, sigma: float, pt: ContactPoint, tol: float = 1e-9) -> bool:
    return abs(symbol_value(pm, sigma, pt)) <= tol


def field_eval(pm: PotentialModel, sigma: float, pt: ContactPoint) -> np.ndarray:
    """W at pt, as (dtheta, dnu, dmu)."""
    theta, nu, mu = pt.theta, pt.nu, pt.mu[0]
    p = symbol_value(pm, sigma, pt)
    return np.array([2.0 * mu,
                     2.0 * mu * mu - p,
                     -2.0 * nu * mu - pm.v0_prime(theta)])


def _rhs(pm: PotentialModel, sigma: float):
    def fn(_t, z):
        theta, nu, mu = z
        p = nu * nu + mu * mu + pm.v0(theta) - sigma
        return (2.0 * mu, 2.0 * mu * mu - p, -2.0 * nu * mu - pm.v0_prime(theta))
    return fn


def tangency_identity() -> bool:
    """Symbolic check that W(p) = -2 nu p identically for n = 2.

    Works in the polynomial ring Q[nu, mu, V, V', s] with the boundary
    potential and its derivative as opaque generators, so the identity
    (hence tangency of W to every shell {p = 0}) holds for every V0 and
    sigma, with no trigonometric input.
    """
    from fractions import Fraction

    from .multipoly import MultiPoly

    nu, mu, V, Vp, s = (MultiPoly.variable(5, j) for j in range(5))
    p = nu * nu + mu * mu + V - s
    dp_theta, dp_nu, dp_mu = Vp, nu.scale(2), mu.scale(2)
    w_theta = mu.scale(2)
    w_nu = mu * mu * Fraction(2) - p
    w_mu = -(nu * mu).scale(2) - Vp
    wp = w_theta * dp_theta + w_nu * dp_nu + w_mu * dp_mu
    return (wp + (nu * p).scale(2)).is_zero()


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # rows (theta, nu, mu)
    pvals: np.ndarray
    sigma: float
    p_drift: float
    nu_min_increment: float

    def point(self, i: int) -> ContactPoint:
        th, nu, mu = self.states[i]
        return ContactPoint("circle", (th,), nu, (mu,))

    def to_csv_rows(self):
        rows = [("t", "chart", "y1", "nu", "mu1", "p")]
        for t, (th, nu, mu), p in zip(self.times, self.states, self.pvals):
            rows.append((repr(float(t)), "circle", repr(float(th)), repr(float(nu)),
                         repr(float(mu)), repr(float(p))))
        return rows


def _make_trajectory(pm: PotentialModel, sigma: float, times, states, p_ref: float = 0.0) -> Trajectory:
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    pvals = states[:, 1] ** 2 + states[:, 2] ** 2 \
        + np.array([pm.v0(th) for th in states[:, 0]]) - sigma
    drift = float(np.max(np.abs(pvals - p_ref))) if pvals.size else 0.0
    dnu = np.diff(states[:, 1])
    nu_min_inc = float(dnu.min()) if dnu.size else 0.0
    return Trajectory(times=times, states=states, pvals=pvals, sigma=sigma,
                      p_drift=drift, nu_min_increment=nu_min_inc)


def integrate_flow(pm: PotentialModel, sigma: float, pt0: ContactPoint,
                   t_span: tuple[float, float], tol: float = DEFAULT_FLOW_TOL,
                   max_step: float | None = None) -> Trajectory:
    """Adaptive integration of W with conservation and monotonicity audits.

    The initial point must be on-shell within tol; along the accepted
    trajectory |p| drifts by at most ~10 tol and nu decreases by at most
    ~10 tol between consecutive samples.
    """
    p_init = symbol_value(pm, sigma, pt0)
    if abs(p_init) > 10 * tol:
        raise ValueError(f"initial point is off-shell: p = {p_init}")
    sol = solve_ivp(_rhs(pm, sigma), t_span, list(pt0.state()), method="DOP853",
                    rtol=tol, atol=tol * 1e-2, dense_output=False,
                    max_step=max_step or np.inf)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return _make_trajectory(pm, sigma, sol.t, sol.y.T, p_ref=p_init)


@dataclass(frozen=True)
class LocatedRadialPoint:
    """A radial point of the explicit flow, with its boundary position."""

    node_id: str
    theta: float
    record: RadialPoint

    @property
    def nu(self) -> float:
        return float(self.record.nu)

    @property
    def is_min(self) -> bool:
        return classify_radial(self.record) == "sourceSink"

    @property
    def outgoing(self) -> bool:
        return self.record.outgoing

    def contact_point(self) -> ContactPoint:
        return ContactPoint("circle", (self.theta,), self.nu, (0.0,))

    def to_json_dict(self) -> dict:
        d = self.record.to_json_dict()
        d.update({"id": self.node_id, "theta": self.theta})
        return d


def _critical_angles(pm: PotentialModel, grid: int = 4096, tol: float = 1e-12) -> list[float]:
    thetas = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    vals = np.array([pm.v0_prime(t) for t in thetas])
    roots = []
    for i in range(grid):
        a, b = thetas[i], thetas[(i + 1) % grid]
        fa, fb = vals[i], vals[(i + 1) % grid]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            bb = b if b > a else b + 2.0 * math.pi
            roots.append(float(brentq(pm.v0_prime, a, bb, xtol=1e-14)) % (2.0 * math.pi))
    dedup: list[float] = []
    for r in sorted(roots):
        if not dedup or abs(r - dedup[-1]) > 1e-9:
            dedup.append(r)
    if dedup and abs(dedup[0] + 2.0 * math.pi - dedup[-1]) < 1e-9:
        dedup.pop()
    return dedup


def locate_radial_points(pm: PotentialModel, sigma: float,
                         tol: float = 1e-9) -> list[LocatedRadialPoint]:
    """All radial points (theta_c, +-sqrt(sigma - V0(theta_c)), mu = 0).

    Critical points of V0 come from a dense grid plus Newton refinement;
    each is cross-checked through the abstract linearization using the
    numerically computed Hessian.  sigma within tol of a critical value
    raises ThresholdEnergyError.
    """
    angles = _critical_angles(pm)
    if not angles:
        raise NotMorseError("V0 has no nondegenerate critical points on the grid")
    out = []
    for k, th in enumerate(angles):
        v = pm.v0(th)
        h = pm.v0_second(th)
        if abs(h) < 1e-8:
            raise NotMorseError(f"degenerate critical point at theta = {th}")
        if abs(sigma - v) < tol:
            raise ThresholdEnergyError(f"sigma = {sigma} is a critical value of V0 (at theta = {th})")
        if v > sigma:
            continue
        cp = CriticalPointSpec(label=f"cp{k}", value=v, hessian=(h,))
        for sign, tag in ((+1, "out"), (-1, "in")):
            rp = linearization_spectrum(cp, sigma, sign)
            node = LocatedRadialPoint(node_id=f"cp{k}:{tag}", theta=th, record=rp)
            w = field_eval(pm, sigma, node.contact_point())
            if np.linalg.norm(w) > 1e-7:
                raise RuntimeError(f"located point {node.node_id} is not radial: |W| = {np.linalg.norm(w)}")
            out.append(node)
    return out


def flow_jacobian(pm: PotentialModel, sigma: float, node: LocatedRadialPoint) -> np.ndarray:
    """Analytic Jacobian of W at a radial point, in (theta, nu, mu)."""
    lam = -2.0 * node.nu
    h = pm.v0_second(node.theta)
    return np.array([[0.0, 0.0, 2.0],
                     [0.0, lam, 0.0],
                     [-h, 0.0, lam]])


@dataclass(frozen=True)
class FlowoutRecord:
    """A witnessed heteroclinic edge q -> q' with its trajectory."""

    source: str
    target: str
    seed_offset: float
    seed_direction: tuple[float, float, float]
    trajectory: Trajectory
    hold_time: float

    def to_json_dict(self) -> dict:
        return {"from": self.source, "to": self.target,
                "seedOffset": self.seed_offset,
                "seedDirection": list(self.seed_direction),
                "pDrift": self.trajectory.p_drift,
                "nuMinIncrement": self.trajectory.nu_min_increment,
                "holdTime": self.hold_time}


@dataclass
class HeteroclinicDag:
    nodes: list[LocatedRadialPoint]
    edges: list[FlowoutRecord]
    undecided: list[dict]
    graph: nx.DiGraph
    settings: dict

    def partial_order(self) -> nx.DiGraph:
        return nx.transitive_closure_dag(self.graph)

    def to_json_dict(self) -> dict:
        return {"nodes": [n.to_json_dict() for n in self.nodes],
                "edges": [e.to_json_dict() for e in self.edges],
                "undecided": self.undecided,
                "settings": self.settings}


def _circle_dist(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def heteroclinic_dag(pm: PotentialModel, sigma: float, eps: float = 1e-5,
                     tol: float = DEFAULT_FLOW_TOL,
                     ball_radius: float = DEFAULT_BALL_RADIUS,
                     w_stop: float = DEFAULT_W_STOP,
                     hold_time: float = DEFAULT_HOLD_TIME,
                     t_max: float = 60.0,
                     nodes: list[LocatedRadialPoint] | None = None) -> HeteroclinicDag:
    """Edges of the flowout order, witnessed by forward trajectories.

    Every non-minimal outgoing radial point is seeded at +-eps along each
    unstable direction of W restricted to the shell; a trajectory records
    an edge when it enters the ball_radius-ball of another radial point
    with |W| < w_stop and stays for hold_time.  Trajectories that do
    neither within t_max are reported as undecided, never dropped.
    """
    nodes = nodes if nodes is not None else locate_radial_points(pm, sigma)
    graph = nx.DiGraph()
    for node in nodes:
        graph.add_node(node.node_id, nu=node.nu, theta=node.theta,
                       is_min=node.is_min, outgoing=node.outgoing)
    edges: list[FlowoutRecord] = []
    undecided: list[dict] = []
    rhs = _rhs(pm, sigma)

    jobs = []
    for node in nodes:
        if not node.outgoing or node.is_min:
            continue
        J = flow_jacobian(pm, sigma, node)
        eigvals, eigvecs = np.linalg.eig(J)
        for col in range(3):
            ev = eigvals[col]
            if ev.real <= 1e-9 or abs(ev.imag) > 1e-12:
                continue
            v = np.real(eigvecs[:, col])
            v = v / np.linalg.norm(v)
            for direction in (+1.0, -1.0):
                jobs.append((node, direction, v))

    def trace(job):
        node, direction, v = job
        seed = node.contact_point().state() + direction * eps * v
        # project back to the shell along nu
        rad = sigma - pm.v0(seed[0]) - seed[2] ** 2
        if rad <= 0:
            return {"from": node.node_id, "reason": "seed off shell",
                    "direction": direction}
        seed[1] = math.copysign(math.sqrt(rad), node.nu)
        return _trace_to_radial_point(pm, sigma, rhs, seed, nodes, node,
                                      direction * eps, tuple(v), tol,
                                      ball_radius, w_stop, hold_time, t_max)

    # seeds integrate independently; the merge below is ordered and
    # deterministic regardless of the thread cap
    for rec in parallel_map(trace, jobs):
        if isinstance(rec, FlowoutRecord):
            if not graph.has_edge(rec.source, rec.target):
                graph.add_edge(rec.source, rec.target)
            edges.append(rec)
        else:
            undecided.append(rec)

    settings = {"eps": eps, "tol": tol, "ballRadius": ball_radius,
                "wStop": w_stop, "holdTime": hold_time, "tMax": t_max}
    return HeteroclinicDag(nodes=nodes, edges=edges, undecided=undecided,
                           graph=graph, settings=settings)


def _trace_to_radial_point(pm, sigma, rhs, seed, nodes, source, seed_offset,
                           seed_direction, tol, ball_radius, w_stop, hold_time, t_max):
    chunk = 1.0
    t_done = 0.0
    state = np.array(seed, dtype=float)
    times_all = [0.0]
    states_all = [state.copy()]
    while t_done < t_max:
        sol = solve_ivp(rhs, (0.0, chunk), state, method="DOP853",
                        rtol=tol, atol=tol * 1e-2)
        if not sol.success:
            return {"from": source.node_id, "reason": f"integration failure: {sol.message}",
                    "direction": math.copysign(1.0, seed_offset)}
        state = sol.y[:, -1]
        t_done += chunk
        times_all.extend((t_done - chunk + sol.t[1:]).tolist())
        states_all.extend(sol.y.T[1:].tolist())
        for target in nodes:
            if target.node_id == source.node_id:
                continue
            d = math.hypot(_circle_dist(state[0], target.theta),
                           state[1] - target.nu, state[2])
            if d < ball_radius:
                pt = ContactPoint("circle", (state[0],), state[1], (state[2],))
                wnorm = np.linalg.norm(field_eval(pm, sigma, pt))
                if wnorm < w_stop:
                    hold = solve_ivp(rhs, (0.0, hold_time), state, method="DOP853",
                                     rtol=tol, atol=tol * 1e-2)
                    end = hold.y[:, -1]
                    d_end = math.hypot(_circle_dist(end[0], target.theta),
                                       end[1] - target.nu, end[2])
                    if d_end < ball_radius:
                        traj = _make_trajectory(pm, sigma, times_all, states_all)
                        return FlowoutRecord(source=source.node_id, target=target.node_id,
                                             seed_offset=seed_offset,
                                             seed_direction=seed_direction,
                                             trajectory=traj, hold_time=hold_time)
    return {"from": source.node_id, "reason": "no convergence within t_max",
            "direction": math.copysign(1.0, seed_offset),
            "final_state": state.tolist()}


@dataclass
class MorseSequence:
    """A total order refining the flowout partial order.

    order[i] is the node added at stage i+1 (so Gamma_i = set(order[:i]));
    each Gamma_i is closed under the partial order and the new node is
    minimal in it.
    """

    order: list[str]
    gammas: list[list[str]]
    verified: bool
    issues: list[str]

    def to_json_dict(self) -> dict:
        return {"order": self.order, "gammas": self.gammas,
                "verified": self.verified, "issues": self.issues}


def morse_sequence(dag: HeteroclinicDag, nu_tie_tol: float = 1e-9) -> MorseSequence:
    """Order outgoing radial points by descending nu, minima last on ties.

    Verifies that the cumulative sets are closed under the transitive
    flowout order and that each added point is order-minimal; a cycle in
    the DAG (a numerical misclassification) is reported, not silently
    broken.
    """
    sub_nodes = [n for n in dag.nodes if n.outgoing]
    sub = dag.graph.subgraph([n.node_id for n in sub_nodes]).copy()
    issues: list[str] = []
    if not nx.is_directed_acyclic_graph(sub):
        cycle = nx.find_cycle(sub)
        return MorseSequence(order=[], gammas=[], verified=False,
                             issues=[f"cycle detected: {cycle}"])
    by_id = {n.node_id: n for n in sub_nodes}

    def sort_key(node_id: str):
        n = by_id[node_id]
        # descending nu; among (numerically) equal nu, minima last
        return (-n.nu, 1 if n.is_min else 0, node_id)

    ids = sorted(by_id, key=sort_key)
    # group equal-nu blocks so the min-last tiebreak applies inside them
    groups: list[list[str]] = []
    for nid in ids:
        if groups and abs(by_id[groups[-1][-1]].nu - by_id[nid].nu) <= nu_tie_tol:
            groups[-1].append(nid)
        else:
            groups.append([nid])
    order: list[str] = []
    for g in groups:
        g.sort(key=lambda nid: (0 if not by_id[nid].is_min else 1, -by_id[nid].nu, nid))
        order.extend(g)

    closure = nx.transitive_closure_dag(sub)
    gammas = []
    for i, nid in enumerate(order):
        gamma = set(order[:i + 1])
        for q in gamma:
            for succ in closure.successors(q):
                if succ not in gamma:
                    issues.append(f"Gamma_{i + 1} not closed: {q} -> {succ}")
        for q in gamma - {nid}:
            if closure.has_edge(q, nid):
                issues.append(f"{nid} not minimal in Gamma_{i + 1}: {q} < {nid}")
        gammas.append(sorted(gamma))
    return MorseSequence(order=order, gammas=gammas, verified=not issues, issues=issues)


@dataclass
class LyapunovGauge:
    """The local gauge rho = |xi_unstable|^2 - |xi_stable|^2 near a radial point.

    xi are eigenframe coordinates of the shell linearization (model
    coordinates to linear order), with the sign flipped for incoming
    points so that W rho > 0 off the point.
    """

    node: LocatedRadialPoint
    frame_inv: np.ndarray       # maps (dtheta, dmu) to eigen coordinates
    signs: np.ndarray           # +1 unstable, -1 stable

    def rho(self, pt: ContactPoint) -> float:
        dz = np.array([pt.theta - self.node.theta, pt.mu[0]])
        xi = self.frame_inv @ dz
        val = float(np.sum(self.signs * np.abs(xi) ** 2))
        return val if self.node.outgoing else -val


def lyapunov_gauge(pm: PotentialModel, sigma: float, node: LocatedRadialPoint) -> LyapunovGauge:
    J = flow_jacobian(pm, sigma, node)
    # restrict to the shell tangent (theta, mu); the nu direction decouples
    Js = J[np.ix_([0, 2], [0, 2])]
    eigvals, eigvecs = np.linalg.eig(Js)
    if abs(eigvals[0].imag) > 1e-12:
        # spiral block: use the real/imaginary parts of one eigenvector
        v = eigvecs[:, 0]
        frame = np.column_stack([v.real, v.imag])
        signs = np.array([1.0 if eigvals[0].real > 0 else -1.0] * 2)
    else:
        frame = np.real(eigvecs)
        signs = np.sign(np.real(eigvals))
    return LyapunovGauge(node=node, frame_inv=np.linalg.inv(frame), signs=signs)


def lyapunov_check(pm: PotentialModel, sigma: float, node: LocatedRadialPoint,
                   radius: float = 1e-2, samples: int = 200,
                   rng: np.random.Generator | None = None) -> dict:
    """Spot check W rho >= c (|y|^2 + |mu|^2) / 2 on shell samples near node.

    Returns the empirical constant c and the validated radius (halved
    until the positivity holds on all samples, if needed).
    """
    rng = rng or np.random.default_rng(20260810)
    gauge = lyapunov_gauge(pm, sigma, node)
    r = radius
    for _ in range(12):
        ok = True
        c_best = math.inf
        for _ in range(samples):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            rad = r * math.sqrt(rng.uniform(0.05, 1.0))
            dth, dmu = rad * math.cos(ang), rad * math.sin(ang)
            th = node.theta + dth
            mu = dmu
            shell = sigma - pm.v0(th) - mu * mu
            if shell <= 0:
                continue
            nu = math.copysign(math.sqrt(shell), node.nu)
            pt = ContactPoint("circle", (th,), nu, (mu,))
            w = field_eval(pm, sigma, pt)
            # W rho via the chain rule in (theta, mu); rho is nu-independent
            h = 1e-7
            pt_th = ContactPoint("circle", (th + h,), nu, (mu,))
            pt_mu = ContactPoint("circle", (th,), nu, (mu + h,))
            drho_th = (gauge.rho(pt_th) - gauge.rho(pt)) / h
            drho_mu = (gauge.rho(pt_mu) - gauge.rho(pt)) / h
            wrho = drho_th * w[0] + drho_mu * w[2]
            quad = dth * dth + dmu * dmu
            if wrho <= 0:
                ok = False
                break
            c_best = min(c_best, 2.0 * wrho / quad)
        if ok and c_best < math.inf:
            return {"nodeId": node.node_id, "validatedRadius": r, "c": c_best, "ok": True}
        r /= 2.0
    return {"nodeId": node.node_id, "validatedRadius": 0.0, "c": 0.0, "ok": False}
