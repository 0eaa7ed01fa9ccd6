"""Pure-Python mirror of the compiled scoring kernel.

Must stay operation-for-operation identical to ``_kernel.pyx`` so that both
backends produce bit-identical costs: same traversals, same accumulation
sequence, same multiply-then-add rounding. The compiled module is built with
-ffp-contract=off for the same reason.

The summation order is label-canonical rather than node-id based: per
internal node the three subtree terms are added in order of each subtree's
smallest leaf, cross-pair sums accumulate over global (u < v) leaf order,
and node totals are added in order of the per-node key (second-smallest,
third-smallest subtree minimum), which identifies internal nodes uniquely.
Isomorphic trees therefore score bit-identically regardless of internal
node numbering.
"""

from __future__ import annotations

BACKEND = "pure"


def cost_distance(adj, n: int, d) -> float:
    """Tree cost for distance-derived topology costs via the internal-node
    decomposition: each internal node credits, per incident edge, the number
    of leaf pairs behind that edge times the summed distances of leaf pairs
    crossing the other two edges. O(n^2) per internal node, O(n^3) total."""
    m = 2 * n - 2
    adj = adj.tolist() if hasattr(adj, "tolist") else adj
    d = d.tolist() if hasattr(d, "tolist") else d
    sub = [0] * n
    mark = [0] * m
    stack = [0] * m
    counts = [0, 0, 0]
    mins = [0, 0, 0]
    cross = [0.0, 0.0, 0.0]
    terms = []

    for p in range(n, m):
        stamp = p + 1
        counts[0] = counts[1] = counts[2] = 0
        row_p = adj[p]
        for slot in range(3):
            root = row_p[slot]
            mark[root] = stamp
            stack[0] = root
            top = 1
            cnt = 0
            while top:
                top -= 1
                v = stack[top]
                if v < n:
                    sub[v] = slot
                    cnt += 1
                else:
                    for w in adj[v]:
                        if w != p and mark[w] != stamp:
                            mark[w] = stamp
                            stack[top] = w
                            top += 1
            counts[slot] = cnt
        mins[0] = mins[1] = mins[2] = -1
        for u in range(n):
            s = sub[u]
            if mins[s] < 0:
                mins[s] = u
        cross[0] = cross[1] = cross[2] = 0.0
        for u in range(n):
            su = sub[u]
            row = d[u]
            for v in range(u + 1, n):
                sv = sub[v]
                if su != sv:
                    cross[su + sv - 1] += row[v]
        order = [0, 1, 2]
        if mins[order[0]] > mins[order[1]]:
            order[0], order[1] = order[1], order[0]
        if mins[order[1]] > mins[order[2]]:
            order[1], order[2] = order[2], order[1]
        if mins[order[0]] > mins[order[1]]:
            order[0], order[1] = order[1], order[0]
        tau = 0.0
        for k in range(3):
            slot = order[k]
            c = counts[slot]
            tau += float((c * (c - 1)) // 2) * cross[2 - slot]
        terms.append((mins[order[1]], mins[order[2]], tau))

    terms.sort()
    total = 0.0
    for _, _, tau in terms:
        total += tau
    return total
