# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scoring kernel.

Operation-for-operation twin of ``quartet._pure`` (see its docstring for the
label-canonical summation order). Compiled with -ffp-contract=off so that
multiply-add rounding matches the interpreter and both backends return
bit-identical costs.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

BACKEND = "kernel"


def cost_distance(const int[:, ::1] adj, int n, const double[:, ::1] d):
    """Distance-backed tree cost via the internal-node decomposition."""
    cdef int m = 2 * n - 2
    cdef int n_int = n - 2
    cdef int *sub = <int *> malloc(n * sizeof(int))
    cdef int *mark = <int *> malloc(m * sizeof(int))
    cdef int *stack = <int *> malloc(m * sizeof(int))
    cdef long *key1 = <long *> malloc(n_int * sizeof(long))
    cdef long *key2 = <long *> malloc(n_int * sizeof(long))
    cdef double *tau = <double *> malloc(n_int * sizeof(double))
    if sub == NULL or mark == NULL or stack == NULL or key1 == NULL \
            or key2 == NULL or tau == NULL:
        free(sub); free(mark); free(stack); free(key1); free(key2); free(tau)
        raise MemoryError()

    cdef int counts[3]
    cdef int mins[3]
    cdef int order[3]
    cdef double cross[3]
    cdef int p, slot, root, top, cnt, v, s2, w, u, su, sv, k, t, i, j
    cdef int stamp
    cdef long c, kk1, kk2
    cdef double acc, total, tt

    with nogil:
        memset(mark, 0, m * sizeof(int))
        for p in range(n, m):
            stamp = p + 1
            counts[0] = 0; counts[1] = 0; counts[2] = 0
            for slot in range(3):
                root = adj[p, slot]
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
                        for s2 in range(3):
                            w = adj[v, s2]
                            if w != p and mark[w] != stamp:
                                mark[w] = stamp
                                stack[top] = w
                                top += 1
                counts[slot] = cnt
            mins[0] = -1; mins[1] = -1; mins[2] = -1
            for u in range(n):
                su = sub[u]
                if mins[su] < 0:
                    mins[su] = u
            cross[0] = 0.0; cross[1] = 0.0; cross[2] = 0.0
            for u in range(n):
                su = sub[u]
                for v in range(u + 1, n):
                    sv = sub[v]
                    if su != sv:
                        cross[su + sv - 1] += d[u, v]
            order[0] = 0; order[1] = 1; order[2] = 2
            if mins[order[0]] > mins[order[1]]:
                t = order[0]; order[0] = order[1]; order[1] = t
            if mins[order[1]] > mins[order[2]]:
                t = order[1]; order[1] = order[2]; order[2] = t
            if mins[order[0]] > mins[order[1]]:
                t = order[0]; order[0] = order[1]; order[1] = t
            acc = 0.0
            for k in range(3):
                slot = order[k]
                c = counts[slot]
                acc += (<double> ((c * (c - 1)) // 2)) * cross[2 - slot]
            i = p - n
            key1[i] = mins[order[1]]
            key2[i] = mins[order[2]]
            tau[i] = acc

        # insertion sort by (key1, key2); keys are unique per node
        for i in range(1, n_int):
            kk1 = key1[i]; kk2 = key2[i]; tt = tau[i]
            j = i - 1
            while j >= 0 and (key1[j] > kk1 or (key1[j] == kk1 and key2[j] > kk2)):
                key1[j + 1] = key1[j]
                key2[j + 1] = key2[j]
                tau[j + 1] = tau[j]
                j -= 1
            key1[j + 1] = kk1
            key2[j + 1] = kk2
            tau[j + 1] = tt

        total = 0.0
        for i in range(n_int):
            total += tau[i]

    free(sub); free(mark); free(stack); free(key1); free(key2); free(tau)
    return total
