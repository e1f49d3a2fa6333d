# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled BPE merge kernel.

Same greedy lowest-rank-first rule as anatomy._merge_py.merge_word; the
win comes from C-level loop control and call overhead, not a different
algorithm. Parity between the two backends is enforced by tests.
"""


def merge_word(symbols: tuple, ranks: dict):
    cdef list syms = list(symbols)
    cdef list out
    cdef Py_ssize_t i, n, best_rank, rank
    cdef object prev, sym, left, right, merged, rank_obj, best_pair

    while len(syms) >= 2:
        best_rank = -1
        best_pair = None
        prev = syms[0]
        n = len(syms)
        for i in range(1, n):
            sym = syms[i]
            rank_obj = ranks.get((prev, sym))
            if rank_obj is not None:
                rank = rank_obj
                if best_rank < 0 or rank < best_rank:
                    best_rank = rank
                    best_pair = (prev, sym)
            prev = sym
        if best_pair is None:
            break
        left = best_pair[0]
        right = best_pair[1]
        merged = left + right
        out = []
        i = 0
        while i < n:
            if i < n - 1 and syms[i] == left and syms[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(syms[i])
                i += 1
        syms = out
    return tuple(syms)
