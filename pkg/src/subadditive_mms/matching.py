"""Augmenting-path bipartite matching with left-side capacities."""


def capacitated_matching(adj, caps=None):
    """Maximum matching where left node ``u`` may take up to ``caps[u]`` right nodes.

    ``adj[u]`` lists the right neighbours of left node ``u`` (any hashable ids);
    right nodes have capacity one.  Left nodes are served in index order and
    neighbours are tried in the order given, so the result is deterministic.
    Returns a list of right-node lists, one per left node.
    """
    caps = [1] * len(adj) if caps is None else list(caps)
    owner = []  # left copy -> left node
    for u, c in enumerate(caps):
        owner.extend([u] * c)
    match_r = {}

    def augment(start):
        seen = set()
        stack, its, via = [start], [iter(adj[owner[start]])], []
        while stack:
            for r in its[-1]:
                if r in seen:
                    continue
                seen.add(r)
                holder = match_r.get(r)
                via.append(r)
                if holder is None:
                    for left, right in zip(stack, via):
                        match_r[right] = left
                    return True
                stack.append(holder)
                its.append(iter(adj[owner[holder]]))
                break
            else:
                stack.pop()
                its.pop()
                if via:
                    via.pop()
        return False

    for copy in range(len(owner)):
        augment(copy)

    out = [[] for _ in adj]
    for r, copy in match_r.items():
        out[owner[copy]].append(r)
    return out
