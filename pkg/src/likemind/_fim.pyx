# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed frequent-itemset miner.

LCM-style prefix-preserving closure extension with occurrence deliver: each
node scans only its supporting transactions to find candidate extensions and
closures, so work shrinks with support instead of staying proportional to the
item universe.  Output matches ``_fim_py`` exactly.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

ctypedef unsigned long long u64


cdef struct MineCtx:
    int n
    int m
    int nw
    int min_support
    int max_len
    int *offsets      # n+1 transaction offsets into flat
    int *flat         # dense item indices per transaction, sorted
    u64 *masks        # per-item transaction bitsets for membership tests


cdef inline bint _has(MineCtx *ctx, int item, int t):
    return (ctx.masks[item * ctx.nw + (t >> 6)] & ((<u64>1) << (t & 63))) != 0


cdef inline void _scan(MineCtx *ctx, int *tids, int supp, int *counts):
    cdef int ti, pos
    memset(counts, 0, ctx.m * sizeof(int))
    for ti in range(supp):
        for pos in range(ctx.offsets[tids[ti]], ctx.offsets[tids[ti] + 1]):
            counts[ctx.flat[pos]] += 1


cdef int _expand(MineCtx *ctx, int *tids, int supp, unsigned char *in_clo,
                 int *counts, int core, list items, list out) except -1:
    """Emit and recurse into every ppc extension of the current closed set.

    ``in_clo`` flags the node's closure; ``counts`` holds per-item occurrence
    counts over ``tids`` (computed by the caller).
    """
    cdef int i, j, ti, new_supp, clo_len
    cdef bint ok
    cdef int m = ctx.m
    cdef int *new_tids = NULL
    cdef int *ccounts = <int *> malloc(m * sizeof(int))
    cdef unsigned char *child_in = <unsigned char *> malloc(m)
    if ccounts == NULL or child_in == NULL:
        free(ccounts); free(child_in)
        raise MemoryError()
    try:
        for i in range(core + 1, m):
            if in_clo[i]:
                continue
            new_supp = counts[i]
            if new_supp < ctx.min_support:
                continue
            new_tids = <int *> malloc(new_supp * sizeof(int))
            if new_tids == NULL:
                raise MemoryError()
            j = 0
            for ti in range(supp):
                if _has(ctx, i, tids[ti]):
                    new_tids[j] = tids[ti]
                    j += 1
            _scan(ctx, new_tids, new_supp, ccounts)
            ok = True
            clo_len = 0
            for j in range(m):
                if ccounts[j] == new_supp:
                    clo_len += 1
                    if j < i and not in_clo[j]:
                        ok = False  # closure reaches before the extension item
                        break
            if ok and (ctx.max_len <= 0 or clo_len <= ctx.max_len):
                memset(child_in, 0, m)
                for j in range(m):
                    if ccounts[j] == new_supp:
                        child_in[j] = 1
                out.append((
                    tuple([items[j] for j in range(m) if child_in[j]]),
                    tuple([new_tids[j] for j in range(new_supp)]),
                ))
                _expand(ctx, new_tids, new_supp, child_in, ccounts, i, items, out)
            free(new_tids)
            new_tids = NULL
        return 0
    finally:
        free(new_tids)
        free(ccounts)
        free(child_in)


def mine_closed(transactions, int min_support=2, int max_len=0):
    """Return (itemset, supporting-transaction-indices) pairs, both sorted."""
    cdef int n = len(transactions)
    if n == 0 or min_support < 1 or min_support > n:
        return []

    freq = {}
    for items in transactions:
        for it in items:
            freq[it] = freq.get(it, 0) + 1
    items_sorted = sorted([it for it, c in freq.items() if c >= min_support])
    cdef int m = len(items_sorted)
    if m == 0:
        return []
    index = {it: i for i, it in enumerate(items_sorted)}

    cdef int nw = (n + 63) >> 6
    cdef int total = 0
    dense = []
    for t_items in transactions:
        row = sorted([index[it] for it in t_items if it in index])
        dense.append(row)
        total += len(row)

    cdef MineCtx ctx
    cdef int *offsets = <int *> malloc((n + 1) * sizeof(int))
    cdef int *flat = <int *> malloc(max(total, 1) * sizeof(int))
    cdef u64 *masks = <u64 *> malloc(m * nw * sizeof(u64))
    cdef int *counts = <int *> malloc(m * sizeof(int))
    cdef int *root_tids = <int *> malloc(n * sizeof(int))
    cdef unsigned char *in_clo = <unsigned char *> malloc(m)
    if (offsets == NULL or flat == NULL or masks == NULL or counts == NULL
            or root_tids == NULL or in_clo == NULL):
        free(offsets); free(flat); free(masks); free(counts)
        free(root_tids); free(in_clo)
        raise MemoryError()

    cdef int t, i, pos, j, clo_len
    cdef list out = []
    try:
        memset(masks, 0, m * nw * sizeof(u64))
        pos = 0
        for t in range(n):
            offsets[t] = pos
            for i in dense[t]:
                flat[pos] = i
                masks[i * nw + (t >> 6)] |= (<u64>1) << (t & 63)
                pos += 1
        offsets[n] = pos
        for t in range(n):
            root_tids[t] = t

        ctx.n = n; ctx.m = m; ctx.nw = nw
        ctx.min_support = min_support
        ctx.max_len = max_len
        ctx.offsets = offsets
        ctx.flat = flat
        ctx.masks = masks

        _scan(&ctx, root_tids, n, counts)
        memset(in_clo, 0, m)
        clo_len = 0
        for j in range(m):
            if counts[j] == n:
                in_clo[j] = 1
                clo_len += 1
        if clo_len:
            if max_len > 0 and clo_len > max_len:
                # every closed itemset contains the root closure; none fit
                return []
            out.append((
                tuple([items_sorted[j] for j in range(m) if in_clo[j]]),
                tuple(range(n)),
            ))
        _expand(&ctx, root_tids, n, in_clo, counts, -1, items_sorted, out)
        return out
    finally:
        free(offsets)
        free(flat)
        free(masks)
        free(counts)
        free(root_tids)
        free(in_clo)
