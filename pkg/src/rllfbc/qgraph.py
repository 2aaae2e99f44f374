"""Output-driven auxiliary graphs and the single-letter capacity bound.

A Q-graph digests the channel-output history through a deterministic
transition map Phi: Q x {0,?,1} -> Q.  Its product with the constraint
automaton carries a Markov chain once an input policy P(x=1 | s, q) is
fixed, and sup over policies (with a single closed communicating class) of
I(X;Y|Q) at stationarity upper-bounds the feedback capacity.

The family built here tracks exactly what the zero-error scheme's decoder
knows: the attempt index within a transmission round (first pass A_i, then
the wrapped repeat pass B_i) and the forced-zero countdown F_j entered
after a delivered 1.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .capacity import SplitVector, binary_entropy
from .constraint import ConstraintAutomaton, ConstraintSpec, build_rll_automaton

OUTPUTS = ("0", "?", "1")


@dataclass(frozen=True)
class QGraph:
    nodes: tuple[str, ...]
    transition: Mapping[tuple[str, str], str]  # (node, output) -> node
    initial: str

    def __post_init__(self) -> None:
        for q in self.nodes:
            for y in OUTPUTS:
                if (q, y) not in self.transition:
                    raise ValueError(f"transition map not total: missing ({q}, {y})")
        g = nx.DiGraph((q, self.transition[(q, y)]) for q in self.nodes for y in OUTPUTS)
        g.add_nodes_from(self.nodes)
        if not nx.is_strongly_connected(g):
            raise ValueError("Q-graph must be irreducible")

    def step(self, q: str, y: str) -> str:
        return self.transition[(q, y)]


def build_q_graph_family(d: int) -> QGraph:
    """The round-phase Q-graph for the (d,inf) constraint: 3d+2 nodes.

    A_i are first-pass attempts, B_i the wrapped repeat pass, F_j the
    forced-zero chain after a delivered 1.  Erasures advance the attempt,
    output 0 restarts a round, output 1 enters the forced-zero chain.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    a = [f"A{i}" for i in range(d + 1)]
    b = [f"B{i}" for i in range(d + 1)]
    f = [f"F{j}" for j in range(1, d + 1)]
    trans: dict[tuple[str, str], str] = {}
    for i in range(d + 1):
        trans[(a[i], "?")] = a[i + 1] if i < d else b[0]
        trans[(b[i], "?")] = b[i + 1] if i < d else b[0]
        trans[(a[i], "0")] = a[0]
        trans[(b[i], "0")] = a[0]
        one_target = f[0] if d > 0 else a[0]
        trans[(a[i], "1")] = one_target
        trans[(b[i], "1")] = one_target
    for j in range(d):
        nxt = f[j + 1] if j + 1 < d else a[0]
        for y in OUTPUTS:
            trans[(f[j], y)] = nxt
    return QGraph(nodes=tuple(a + b + f), transition=trans, initial=a[0])


@dataclass(frozen=True)
class SQGraph:
    """Product of the constraint automaton with a Q-graph over a BEC(eps)."""

    automaton: ConstraintAutomaton
    q: QGraph
    eps: float
    nodes: tuple[tuple[int, str], ...]
    edges: tuple[tuple[int, int, str, float, int], ...]  # (from, x, y, P(y|x), to)

    def index(self, s: int, qn: str) -> int:
        return self.nodes.index((s, qn))


def _bec_law(eps: float) -> dict[tuple[int, str], float]:
    return {
        (0, "0"): 1.0 - eps,
        (0, "?"): eps,
        (0, "1"): 0.0,
        (1, "1"): 1.0 - eps,
        (1, "?"): eps,
        (1, "0"): 0.0,
    }


def build_sq_graph(automaton: ConstraintAutomaton, q: QGraph, eps: float) -> SQGraph:
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0,1]")
    law = _bec_law(eps)
    nodes = tuple((s, qn) for s in automaton.states for qn in q.nodes)
    pos = {node: i for i, node in enumerate(nodes)}
    edges = []
    for s, qn in nodes:
        for x in (0, 1):
            s_next = automaton.step(s, x)
            if s_next is None:
                continue
            for y in OUTPUTS:
                p = law[(x, y)]
                if p > 0.0:
                    edges.append((pos[(s, qn)], x, y, p, pos[(s_next, q.step(qn, y))]))
    return SQGraph(automaton=automaton, q=q, eps=eps, nodes=nodes, edges=tuple(edges))


@dataclass
class InputPolicy:
    """P(x=1 | s, q); zero is forced wherever the constraint forbids a 1."""

    p1: dict[tuple[int, str], float]

    def prob(self, s: int, qn: str) -> float:
        return self.p1.get((s, qn), 0.0)


def scheme_induced_policy(delta: "SplitVector | Sequence[float]", d: int) -> InputPolicy:
    """Transmit probabilities of the zero-error scheme, conditioned on (s, q).

    At first-pass attempt i the cells of earlier attempts are excluded by
    the s = d conditioning, so P(send) = delta_i / (1 - sum_{j<i} delta_j);
    on the repeat pass everything but cell i and the labelled remainder is
    excluded, so P(send) = delta_i / (delta_i + 1 - sum_j delta_j).
    """
    vec = delta.delta if isinstance(delta, SplitVector) else tuple(delta)
    if len(vec) != d + 1:
        raise ValueError("delta must have length d+1")
    total = sum(vec)
    p1: dict[tuple[int, str], float] = {}
    prefix = 0.0
    for i, di in enumerate(vec):
        denom_a = 1.0 - prefix
        p1[(d, f"A{i}")] = min(1.0, di / denom_a) if denom_a > 1e-300 else 1.0
        denom_b = di + 1.0 - total
        p1[(d, f"B{i}")] = min(1.0, di / denom_b) if denom_b > 1e-300 else 1.0
        prefix += di
    return InputPolicy(p1=p1)


@dataclass
class ChainAnalysis:
    pi: "dict[tuple[int, str], float] | None"
    classes: list[tuple[frozenset, bool]]  # (member nodes, closed?)
    period: "int | None"
    in_omega: bool
    aperiodic: bool


def _transition_matrix(sq: SQGraph, policy: InputPolicy) -> np.ndarray:
    n = len(sq.nodes)
    mat = np.zeros((n, n))
    for frm, x, _y, p_y, to in sq.edges:
        s, qn = sq.nodes[frm]
        p1 = policy.prob(s, qn)
        p_x = p1 if x == 1 else 1.0 - p1
        if p_x > 0.0:
            mat[frm, to] += p_x * p_y
    return mat


def _class_period(mat: np.ndarray, members: Sequence[int]) -> int:
    """gcd of cycle lengths within a closed class, by BFS level differences."""
    start = members[0]
    level = {start: 0}
    order = [start]
    g = 0
    inside = set(members)
    for u in order:
        for v in np.nonzero(mat[u] > 0.0)[0]:
            v = int(v)
            if v not in inside:
                continue
            if v in level:
                g = math.gcd(g, level[u] + 1 - level[v])
            else:
                level[v] = level[u] + 1
                order.append(v)
    return abs(g) if g else 0


def analyze_chain(sq: SQGraph, policy: InputPolicy) -> ChainAnalysis:
    """Communicating classes, the single-closed-class flag, period, and pi.

    Zero-probability edges are discarded before the analysis.  When the
    chain has one closed class, the stationary distribution is obtained by
    a dense solve restricted to that class (residual <= 1e-12).
    """
    mat = _transition_matrix(sq, policy)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(sq.nodes)))
    for u, v in zip(*np.nonzero(mat > 0.0)):
        g.add_edge(int(u), int(v))
    sccs = [frozenset(c) for c in nx.strongly_connected_components(g)]
    classes = []
    closed_sets = []
    for comp in sccs:
        closed = all(int(v) in comp for u in comp for v in np.nonzero(mat[u] > 0.0)[0])
        classes.append((frozenset(sq.nodes[i] for i in comp), closed))
        if closed:
            closed_sets.append(sorted(comp))
    in_omega = len(closed_sets) == 1
    period: int | None = None
    aperiodic = False
    pi = None
    if in_omega:
        members = closed_sets[0]
        period = _class_period(mat, members)
        aperiodic = period == 1
        sub = mat[np.ix_(members, members)]
        k = len(members)
        a = np.eye(k) - sub.T + np.ones((k, k))
        v = np.linalg.solve(a, np.ones(k))
        resid = float(np.max(np.abs(v @ sub - v)))
        if resid > 1e-12 or abs(v.sum() - 1.0) > 1e-12:
            raise AssertionError(f"stationary solve failed, residual {resid}")
        pi = {node: 0.0 for node in sq.nodes}
        for idx, val in zip(members, v):
            pi[sq.nodes[idx]] = float(val)
    return ChainAnalysis(pi=pi, classes=classes, period=period, in_omega=in_omega, aperiodic=aperiodic)


def conditional_mutual_information(
    sq: SQGraph, policy: InputPolicy, eps: "float | None" = None
) -> float:
    """I(X;Y|Q) in bits under the stationary law of the induced chain."""
    if eps is not None and abs(eps - sq.eps) > 1e-15:
        raise ValueError("eps disagrees with the product graph")
    analysis = analyze_chain(sq, policy)
    if not (analysis.in_omega and analysis.aperiodic):
        raise ValueError("policy is outside Omega or periodic; I(X;Y|Q) undefined")
    assert analysis.pi is not None
    return _cmi_from_pi(sq, policy, analysis.pi)


def _cmi_from_pi(sq: SQGraph, policy: InputPolicy, pi: Mapping) -> float:
    law = _bec_law(sq.eps)
    by_q: dict[str, dict[int, float]] = {}
    for (s, qn), mass in pi.items():
        if mass > 0.0:
            by_q.setdefault(qn, {})[s] = mass
    total_i = 0.0
    for qn, s_mass in by_q.items():
        pq = sum(s_mass.values())
        joint: dict[tuple[int, str], float] = {}
        for s, mass in s_mass.items():
            p1 = policy.prob(s, qn)
            for x, px in ((0, 1.0 - p1), (1, p1)):
                if px <= 0.0:
                    continue
                for y in OUTPUTS:
                    pyx = law[(x, y)]
                    if pyx > 0.0:
                        joint[(x, y)] = joint.get((x, y), 0.0) + (mass / pq) * px * pyx
        px_m: dict[int, float] = {}
        py_m: dict[str, float] = {}
        for (x, y), p in joint.items():
            px_m[x] = px_m.get(x, 0.0) + p
            py_m[y] = py_m.get(y, 0.0) + p
        iq = sum(
            p * math.log2(p / (px_m[x] * py_m[y])) for (x, y), p in joint.items() if p > 0.0
        )
        total_i += pq * iq
    return total_i


def _fast_cmi(sq: SQGraph, probs: np.ndarray, ctx: dict) -> float:
    """I(X;Y|Q) for an interior policy using the cached chain structure.

    Interior coordinates keep the positive-edge structure constant, so the
    closed class and its aperiodicity are validated once and reused.
    """
    mat = ctx["base"].copy()
    for (slot, frm, to), w in ctx["terms"]:
        mat[frm, to] += w * probs[slot]
    members = ctx["members"]
    sub = mat[np.ix_(members, members)]
    k = len(members)
    v = np.linalg.solve(np.eye(k) - sub.T + np.ones((k, k)), np.ones(k))
    eps = sq.eps
    total_i = 0.0
    for qn, rows in ctx["by_q"].items():
        pq = 0.0
        p1_avg = 0.0
        for local, slot in rows:
            mass = v[local]
            pq += mass
            p1_avg += mass * (probs[slot] if slot >= 0 else 0.0)
        if pq <= 0.0:
            continue
        # For a BEC, I(X;Y|Q=q) = (1-eps) * h(E[P(x=1) | q]).
        total_i += pq * (1.0 - eps) * binary_entropy(min(1.0, max(0.0, p1_avg / pq)))
    return total_i


def optimize_upper_bound(
    sq: SQGraph,
    eps: "float | None" = None,
    restarts: int = 8,
    tol: float = 1e-6,
    seed: int = 7,
    warm_start: "InputPolicy | None" = None,
) -> dict:
    """Coordinate-ascent search for sup I(X;Y|Q) over interior policies.

    Each free coordinate (a state allowing input 1, paired with a Q-node) is
    maximized by golden-section over [lo, 1-lo] with the rest held fixed;
    multi-start guards against local maxima.  Interior iterates keep the
    chain inside Omega by construction; the returned policy is re-validated
    with the full chain analysis.
    """
    if eps is not None and abs(eps - sq.eps) > 1e-15:
        raise ValueError("eps disagrees with the product graph")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    auto = sq.automaton
    coords = [(s, qn) for (s, qn) in sq.nodes if auto.step(s, 1) is not None]
    slot_of = {c: i for i, c in enumerate(coords)}
    lo = 1e-9

    # Cache the interior-policy chain structure once.
    probe = InputPolicy({c: 0.5 for c in coords})
    probe_analysis = analyze_chain(sq, probe)
    if not (probe_analysis.in_omega and probe_analysis.aperiodic):
        raise ValueError("interior policies fall outside Omega on this product graph")
    closed_class = next(cls for cls, is_closed in probe_analysis.classes if is_closed)
    members = sorted(i for i, node in enumerate(sq.nodes) if node in closed_class)
    n = len(sq.nodes)
    base = np.zeros((n, n))
    terms: list[tuple[tuple[int, int, int], float]] = []
    for frm, x, _y, p_y, to in sq.edges:
        node = sq.nodes[frm]
        if node in slot_of:
            slot = slot_of[node]
            if x == 1:
                terms.append(((slot, frm, to), p_y))
            else:
                base[frm, to] += p_y
                terms.append(((slot, frm, to), -p_y))
        elif x == 0:
            base[frm, to] += p_y
    by_q: dict[str, list[tuple[int, int]]] = {}
    for local, idx in enumerate(members):
        s, qn = sq.nodes[idx]
        by_q.setdefault(qn, []).append((local, slot_of.get((s, qn), -1)))
    ctx = {"base": base, "terms": terms, "members": members, "by_q": by_q}

    def score(vec: np.ndarray) -> float:
        return _fast_cmi(sq, vec, ctx)

    rng = random.Random(seed)
    inits = []
    if warm_start is not None:
        inits.append(np.array([min(1 - lo, max(lo, warm_start.prob(*c))) for c in coords]))
    inits.append(np.full(len(coords), 0.5))
    while len(inits) < restarts:
        inits.append(np.array([rng.uniform(0.05, 0.95) for _ in coords]))

    phi = (math.sqrt(5.0) - 1.0) / 2.0
    best_vec, best_val = None, -1.0
    for vec in inits[:max(restarts, len(inits))]:
        vec = vec.copy()
        val = score(vec)
        for _sweep in range(200):
            improved = val
            for i in range(len(coords)):
                a, b = lo, 1.0 - lo
                fa_vec = vec.copy()
                c1 = b - phi * (b - a)
                c2 = a + phi * (b - a)
                fa_vec[i] = c1
                f1 = score(fa_vec)
                fa_vec[i] = c2
                f2 = score(fa_vec)
                for _ in range(40):
                    if f1 < f2:
                        a, c1, f1 = c1, c2, f2
                        c2 = a + phi * (b - a)
                        fa_vec[i] = c2
                        f2 = score(fa_vec)
                    else:
                        b, c2, f2 = c2, c1, f1
                        c1 = b - phi * (b - a)
                        fa_vec[i] = c1
                        f1 = score(fa_vec)
                xbest = c1 if f1 >= f2 else c2
                fbest = max(f1, f2)
                if fbest > val:
                    vec[i] = xbest
                    val = fbest
            if val - improved < tol:
                break
        if val > best_val:
            best_val, best_vec = val, vec.copy()

    assert best_vec is not None
    policy = InputPolicy({c: float(p) for c, p in zip(coords, best_vec)})
    value = conditional_mutual_information(sq, policy)  # full-path re-validation
    return {"value": value, "policy": policy}


def check_bcjr_invariance(sq: SQGraph, policy: InputPolicy) -> dict:
    """One-step posterior consistency of the constraint state along Q-edges.

    For every (q, y) with positive stationary flow into q' = Phi(q, y), the
    posterior P(s' | q, y) must match the stationary conditional P(s' | q').
    """
    analysis = analyze_chain(sq, policy)
    if not analysis.in_omega or analysis.pi is None:
        raise ValueError("chain must have a unique closed class")
    pi = analysis.pi
    law = _bec_law(sq.eps)
    states = sq.automaton.states
    pos = {node: i for i, node in enumerate(sq.nodes)}
    q_mass: dict[str, float] = {}
    for (s, qn), mass in pi.items():
        q_mass[qn] = q_mass.get(qn, 0.0) + mass
    max_resid = 0.0
    for qn in sq.q.nodes:
        for y in OUTPUTS:
            q_next = sq.q.step(qn, y)
            flow = {s2: 0.0 for s2 in states}
            for s in states:
                mass = pi[(s, qn)]
                if mass <= 0.0:
                    continue
                p1 = policy.prob(s, qn)
                for x, px in ((0, 1.0 - p1), (1, p1)):
                    if px <= 0.0:
                        continue
                    pyx = law[(x, y)]
                    s2 = sq.automaton.step(s, x)
                    if pyx > 0.0 and s2 is not None:
                        flow[s2] += mass * px * pyx
            total = sum(flow.values())
            if total <= 1e-15 or q_mass.get(q_next, 0.0) <= 1e-15:
                continue
            for s2 in states:
                posterior = flow[s2] / total
                target = pi[(s2, q_next)] / q_mass[q_next]
                max_resid = max(max_resid, abs(posterior - target))
    return {"holds": max_resid <= 1e-9, "max_residual": max_resid}


def serialize_q_graph(q: QGraph) -> str:
    lines = [f"node {n}" for n in q.nodes]
    for n in q.nodes:
        for y in OUTPUTS:
            lines.append(f"edge {n} {y} {q.step(n, y)}")
    return "\n".join(lines) + "\n"


def serialize_sq_graph(sq: SQGraph) -> str:
    lines = [f"node {s},{qn}" for s, qn in sq.nodes]
    for frm, x, y, p, to in sq.edges:
        s, qn = sq.nodes[frm]
        s2, qn2 = sq.nodes[to]
        lines.append(f"edge {s},{qn} {x},{y},{p:.9g} {s2},{qn2}")
    return "\n".join(lines) + "\n"


def upper_bound_for(d: int, eps: float, restarts: int = 8, tol: float = 1e-6,
                    seed: int = 7, delta_star: "SplitVector | None" = None) -> dict:
    """Convenience wrapper: build the family, product, and optimize the bound."""
    spec = ConstraintSpec(d)
    auto = build_rll_automaton(spec)
    q = build_q_graph_family(d)
    sq = build_sq_graph(auto, q, eps)
    warm = scheme_induced_policy(delta_star, d) if delta_star is not None else None
    return optimize_upper_bound(sq, eps, restarts=restarts, tol=tol, seed=seed, warm_start=warm)
