"""Pure-Python BPE merge kernel (fallback for the compiled version).

Both backends implement the identical greedy rule: repeatedly find the
lowest-ranked adjacent symbol pair present in the word and merge every
occurrence of it, until no rankable pair remains.
"""


def merge_word(symbols: tuple, ranks: dict) -> tuple:
    """Collapse a word's symbol sequence using a pair-rank table.

    ``symbols`` is the byte-unit sequence of one word; ``ranks`` maps
    (left, right) symbol pairs to their merge priority (lower merges
    first). Returns the fully merged symbol tuple.
    """
    symbols = list(symbols)
    while len(symbols) >= 2:
        best_rank = -1
        best_pair = None
        prev = symbols[0]
        for sym in symbols[1:]:
            rank = ranks.get((prev, sym))
            if rank is not None and (best_rank < 0 or rank < best_rank):
                best_rank = rank
                best_pair = (prev, sym)
            prev = sym
        if best_pair is None:
            break
        left, right = best_pair
        merged = left + right
        out = []
        i = 0
        n = len(symbols)
        while i < n:
            if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
    return tuple(symbols)
