"""Guiding graphs: seed/allocation bipartite graphs, girth lifts and edge labels.

Seeds are ``0..n_seeds-1`` and allocation nodes ``0..n_alloc-1`` (separate id
spaces).  Every seed has exactly one edge to an allocation node of each of
the ``q_size`` agents, stored as ``seed_nbr[s, t]``; every allocation node has
``k + 1`` seed neighbours, stored as ``alloc_nbr[a]``.  Edge ``(s, t)`` has id
``s * q_size + t``.
"""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded, InternalHallViolation
from .matching import capacitated_matching

LIFT_CAP = 20
HALF = Fraction(1, 2)


@dataclass
class GuidingGraph:
    k: int
    q_size: int
    agent_of: np.ndarray  # allocation node -> agent position in Q
    seed_nbr: np.ndarray  # (n_seeds, q_size) allocation node ids
    alloc_nbr: np.ndarray  # (n_alloc, k + 1) seed ids
    reps: tuple = None  # nodes meeting every automorphism orbit, as ("seed"|"alloc", id)

    @property
    def n_seeds(self):
        return self.seed_nbr.shape[0]

    @property
    def n_alloc(self):
        return self.alloc_nbr.shape[0]

    @property
    def n_edges(self):
        return self.seed_nbr.size

    def check(self):
        """Structural guiding-graph invariants; raises AssertionError on failure."""
        assert self.seed_nbr.shape == (self.n_seeds, self.q_size)
        assert self.alloc_nbr.shape == (self.n_alloc, self.k + 1)
        assert (self.agent_of[self.seed_nbr] == np.arange(self.q_size)).all()
        deg = np.bincount(self.seed_nbr.ravel(), minlength=self.n_alloc)
        assert (deg == self.k + 1).all()
        for a in range(self.n_alloc):
            for s in self.alloc_nbr[a]:
                assert self.seed_nbr[s, self.agent_of[a]] == a
        return True


def base_graph(q_size, k):
    """Complete bipartite guiding graph: ``k + 1`` seeds, one allocation node per agent."""
    if q_size < 1 or k < 1:
        raise ValueError("need q_size >= 1 and k >= 1")
    seed_nbr = np.tile(np.arange(q_size), (k + 1, 1))
    alloc_nbr = np.tile(np.arange(k + 1), (q_size, 1))
    return GuidingGraph(k, q_size, np.arange(q_size), seed_nbr, alloc_nbr)


def _adjacency(g):
    off = g.n_seeds
    adj = [[] for _ in range(g.n_seeds + g.n_alloc)]
    for s in range(g.n_seeds):
        for a in g.seed_nbr[s]:
            adj[s].append(off + int(a))
            adj[off + int(a)].append(s)
    return adj


def girth(g):
    """Length of the shortest cycle (``inf`` for forests), by BFS from each root.

    Lifted graphs carry orbit representatives under their cyclic automorphism,
    so only those roots are searched.
    """
    adj = _adjacency(g)
    if g.reps is None:
        roots = range(len(adj))
    else:
        roots = [r if kind == "seed" else g.n_seeds + r for kind, r in g.reps]
    best = float("inf")
    for root in roots:
        dist, parent = {root: 0}, {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w], parent[w] = dist[u] + 1, u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def girth_lift(g, cap=LIFT_CAP):
    """Cyclic lift with edge shifts ``2^0 .. 2^(r-1)`` over ``h = 2^r`` copies.

    Copy ``i`` of seed ``v`` joins copy ``(i + x) mod h`` of allocation node ``u``
    for every base edge ``(v, u)`` with shift ``x``; the result is again a
    guiding graph and its girth strictly exceeds the input's.
    """
    r = g.n_edges
    if r > cap:
        raise CapExceeded(f"lift needs edge count <= {cap}, got {r}")
    h = 1 << r
    shift = (np.int64(1) << np.arange(r, dtype=np.int64)).reshape(g.n_seeds, g.q_size)
    i = np.arange(h, dtype=np.int64)
    # seed s copy i -> alloc seed_nbr[s, t] copy (i + shift[s, t]) % h
    seed_nbr = (g.seed_nbr[:, None, :] * h
                + (i[None, :, None] + shift[:, None, :]) % h).reshape(g.n_seeds * h, g.q_size)
    # alloc a copy j <- seed alloc_nbr[a, c] copy (j - shift) % h
    a_shift = shift[g.alloc_nbr, g.agent_of[:, None]]
    alloc_nbr = (g.alloc_nbr[:, None, :] * h
                 + (i[None, :, None] - a_shift[:, None, :]) % h).reshape(g.n_alloc * h, g.k + 1)
    agent_of = np.repeat(g.agent_of, h)
    reps = tuple([("seed", s * h) for s in range(g.n_seeds)]
                 + [("alloc", a * h) for a in range(g.n_alloc)])
    return GuidingGraph(g.k, g.q_size, agent_of, seed_nbr, alloc_nbr, reps)


def label_nodes(g, witness_bundles, rng):
    """Uniformly pick one witness bundle index per allocation node.

    ``witness_bundles[t]`` lists agent ``t``'s disjoint bundles.
    """
    sizes = np.array([len(b) for b in witness_bundles])
    draws = rng.random(g.n_alloc)
    return np.floor(draws * sizes[g.agent_of]).astype(np.int64)


@dataclass
class EdgeLabelling:
    items: tuple  # item ids, column order of ``edge_mask``
    bundles: list  # per agent: list of witness bundles
    choice: np.ndarray  # allocation node -> bundle index
    edge_mask: np.ndarray  # (n_edges, len(items)) bool
    tree_nodes: np.ndarray  # (n_alloc, len(items)) bool: node holds item in a tree component
    stats: dict = field(default_factory=dict)

    def node_label(self, g, a):
        return self.bundles[int(g.agent_of[a])][int(self.choice[a])]

    def edge_label(self, g, s, t):
        row = self.edge_mask[s * g.q_size + t]
        return frozenset(self.items[j] for j in np.flatnonzero(row))


def item_subgraph(g, lab_choice, bundles, item):
    """Allocation nodes whose label holds ``item`` (the nodes of H_x)."""
    holder = np.full(g.q_size, -1)
    for t, fam in enumerate(bundles):
        for j, bundle in enumerate(fam):
            if item in bundle:
                holder[t] = j
                break
    return np.flatnonzero(lab_choice == holder[g.agent_of])


def tree_components(g, nodes):
    """Component label per node of H_x plus a per-component tree flag."""
    if len(nodes) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    seeds = g.alloc_nbr[nodes].ravel()
    uniq, seed_pos = np.unique(seeds, return_inverse=True)
    na = len(nodes)
    rows = np.repeat(np.arange(na), g.k + 1)
    cols = na + seed_pos
    size = na + len(uniq)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    ncomp, comp = connected_components(graph, directed=False)
    verts = np.bincount(comp, minlength=ncomp)
    edges = np.bincount(comp[:na], minlength=ncomp) * (g.k + 1)
    is_tree = edges == verts - 1
    return comp[:na], is_tree


def label_edges(g, choice, bundles, items):
    """Per item, put it on exactly ``k`` edges of every allocation node of a tree
    component of H_x with no seed receiving it twice; nodes of cyclic
    components get the item on no edge.
    """
    items = tuple(items)
    q = g.q_size
    edge_mask = np.zeros((g.n_edges, len(items)), dtype=bool)
    tree_nodes = np.zeros((g.n_alloc, len(items)), dtype=bool)
    stats = {"tree_fraction": [], "failed_nodes": [], "h_nodes": []}
    for col, item in enumerate(items):
        nodes = item_subgraph(g, choice, bundles, item)
        comp, is_tree = tree_components(g, nodes)
        ok = is_tree[comp] if len(nodes) else np.zeros(0, dtype=bool)
        good = nodes[ok]
        tree_nodes[good, col] = True
        stats["h_nodes"].append(int(len(nodes)))
        stats["failed_nodes"].append(int(len(nodes) - len(good)))
        stats["tree_fraction"].append(1.0 if len(nodes) == 0 else float(ok.mean()))
        if len(good) == 0:
            continue
        adj = [[int(s) for s in g.alloc_nbr[a]] for a in good]
        matched = capacitated_matching(adj, [g.k] * len(good))
        for a, seeds in zip(good, matched):
            if len(seeds) != g.k:
                raise InternalHallViolation(
                    f"item {item}: allocation node {a} matched {len(seeds)} of {g.k} seeds")
            t = int(g.agent_of[a])
            for s in seeds:
                edge_mask[s * q + t, col] = True
    return EdgeLabelling(items, bundles, choice, edge_mask, tree_nodes, stats)


def build_labelling(g, bundles, items, rng):
    return label_edges(g, label_nodes(g, bundles, rng), bundles, items)


def sample_allocation(g, lab, rng, seed=None):
    """Bundles of the edges at one (uniformly drawn unless given) seed node."""
    if seed is None:
        seed = int(rng.integers(g.n_seeds))
    return seed, [lab.edge_label(g, seed, t) for t in range(g.q_size)]


def served_at(g, lab, valuations, seed, floor=HALF):
    """Agents (positions in Q) whose bundle at ``seed`` is worth at least ``floor``."""
    return [t for t in range(g.q_size)
            if valuations[t](lab.edge_label(g, seed, t)) >= floor]


def estimate_success(g, lab, valuations, trials, rng, floor=HALF):
    """Mean fraction of Q served at ``floor`` over ``trials`` uniformly drawn seeds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = rng.integers(g.n_seeds, size=trials)
    cache, total = {}, 0
    for s in seeds:
        s = int(s)
        if s not in cache:
            cache[s] = len(served_at(g, lab, valuations, s, floor))
        total += cache[s]
    return total / (trials * g.q_size)


def red_edge_report(g, lab, valuations, floor=HALF):
    """Per-node check of the red-edge argument.

    For every allocation node whose sets ``W_j = L_u - L_{e_j}`` are pairwise
    disjoint, count incident edges worth less than ``floor``.  Returns
    ``(checked, violations, disjoint_fraction)`` where a violation is a node
    with two or more such edges while ``V(L_u) >= 2 * floor``.
    """
    checked, bad = 0, []
    for a in range(g.n_alloc):
        t = int(g.agent_of[a])
        label = lab.node_label(g, a)
        edge_labels = [lab.edge_label(g, int(s), t) for s in g.alloc_nbr[a]]
        ws = [label - e for e in edge_labels]
        seen, disjoint = set(), True
        for w in ws:
            if seen & w:
                disjoint = False
                break
            seen |= w
        if not disjoint:
            continue
        checked += 1
        v = valuations[t]
        if v(label) >= 2 * floor and sum(v(e) < floor for e in edge_labels) > 1:
            bad.append(a)
    return checked, bad, checked / g.n_alloc


def seed_disjoint(g, lab):
    """True iff at every seed each item sits on at most one incident edge."""
    per_seed = lab.edge_mask.reshape(g.n_seeds, g.q_size, -1).sum(axis=1)
    return bool((per_seed <= 1).all())
