"""Pure-Python closed frequent-itemset miner (LCM-style enumeration).

Transactions are bitsets stored as Python ints; each closed itemset is emitted
exactly once via prefix-preserving closure extension.  Semantics match the
compiled kernel in ``_fim.pyx``: all closed itemsets with support >=
``min_support`` and length <= ``max_len`` (0 = unlimited).
"""

from __future__ import annotations

from typing import Iterable, Sequence


def mine_closed(
    transactions: Sequence[Iterable[int]],
    min_support: int = 2,
    max_len: int = 0,
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Return (itemset, supporting-transaction-indices) pairs, both sorted."""
    n = len(transactions)
    if n == 0 or min_support < 1 or min_support > n:
        return []

    tidsets: dict[int, int] = {}
    for t, items in enumerate(transactions):
        bit = 1 << t
        for it in items:
            tidsets[it] = tidsets.get(it, 0) | bit
    items = sorted(it for it, mask in tidsets.items() if mask.bit_count() >= min_support)
    if not items:
        return []
    masks = [tidsets[it] for it in items]
    m = len(items)
    full = (1 << n) - 1
    no_cap = max_len <= 0
    out: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def closure(tids: int) -> list[int]:
        return [i for i in range(m) if masks[i] & tids == tids]

    def tid_tuple(tids: int) -> tuple[int, ...]:
        picked = []
        t = 0
        while tids:
            if tids & 1:
                picked.append(t)
            tids >>= 1
            t += 1
        return tuple(picked)

    def emit(clo: list[int], tids: int) -> None:
        out.append((tuple(items[i] for i in clo), tid_tuple(tids)))

    def rec(clo_set: set[int], tids: int, core: int) -> None:
        for idx in range(core + 1, m):
            if idx in clo_set:
                continue
            new_tids = tids & masks[idx]
            if new_tids.bit_count() < min_support:
                continue
            new_clo = closure(new_tids)
            # prefix condition: the closure may not introduce items before idx
            ok = True
            for j in new_clo:
                if j >= idx:
                    break
                if j not in clo_set:
                    ok = False
                    break
            if not ok:
                continue
            if not no_cap and len(new_clo) > max_len:
                continue
            emit(new_clo, new_tids)
            rec(set(new_clo), new_tids, idx)

    root_clo = closure(full)
    if root_clo:
        if not no_cap and len(root_clo) > max_len:
            # every closed itemset contains the root closure, so none fit the cap
            return []
        emit(root_clo, full)
    rec(set(root_clo), full, -1)
    return out
