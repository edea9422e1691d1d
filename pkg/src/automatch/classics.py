"""Machines encoding the classic single-pattern search algorithms.

Each builder produces a machine whose access sequence on every text equals the
textbook algorithm's access sequence (the test suite checks this against
directly coded implementations).  State layout conventions: working states
first, sink last.
"""

from __future__ import annotations

from .machine import Alphabet, Machine, MachineError, Pattern, _as_pattern

__all__ = [
    "ALGORITHMS",
    "build_naive",
    "build_morris_pratt",
    "build_knuth_morris_pratt",
    "build_horspool",
    "build_quicksearch",
    "build_classic",
    "failure_function",
    "strong_failure_function",
]


def failure_function(w: str) -> list[int]:
    """Border table: f[j] = length of the longest proper border of w[:j],
    for j in 0..|w| (f[0] = 0 by convention, unused)."""
    f = [0] * (len(w) + 1)
    k = 0
    for j in range(1, len(w)):
        while k > 0 and w[j] != w[k]:
            k = f[k]
        if w[j] == w[k]:
            k += 1
        f[j + 1] = k
    return f


def strong_failure_function(w: str) -> list[int]:
    """Mismatch fallback: fs[j] = the largest border length b of w[:j] with
    w[b] != w[j], or -1 when the window should move past position j entirely.
    fs[0] = -1."""
    f = failure_function(w)
    fs = [-1] * len(w)
    for j in range(1, len(w)):
        b = f[j]
        while b >= 0:
            if w[b] != w[j]:
                fs[j] = b
                break
            if b == 0:
                fs[j] = -1
                break
            b = f[b]
    return fs


def build_naive(pattern: Pattern | str, alphabet: Alphabet | str | None = None) -> Machine:
    """Window-by-window left-to-right comparison, shifting by one."""
    pat = _as_pattern(pattern, alphabet)
    w, asz = pat.text, pat.alphabet.size
    n = len(w)
    next_of = list(range(n))
    prematch = [j == n - 1 for j in range(n)]
    delta = []
    sigma = []
    for j in range(n):
        row_d, row_s = [], []
        for sym in pat.alphabet:
            if j < n - 1 and sym == w[j]:
                row_d.append(j + 1)
                row_s.append(0)
            else:
                row_d.append(0)
                row_s.append(1)
        delta.append(row_d)
        sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


def build_morris_pratt(
    pattern: Pattern | str, alphabet: Alphabet | str | None = None
) -> Machine:
    """Left-to-right scan with border-table fallbacks; re-compares the
    mismatched position after a fallback, exactly like the original algorithm
    counts its comparisons."""
    pat = _as_pattern(pattern, alphabet)
    w = pat.text
    n = len(w)
    f = failure_function(w)
    next_of = list(range(n))
    prematch = [j == n - 1 for j in range(n)]
    delta = []
    sigma = []
    for j in range(n):
        row_d, row_s = [], []
        for sym in pat.alphabet:
            if sym == w[j]:
                if j < n - 1:
                    row_d.append(j + 1)
                    row_s.append(0)
                else:  # full match: continue from the longest border
                    row_d.append(f[n])
                    row_s.append(n - f[n])
            else:
                if j == 0:
                    row_d.append(0)
                    row_s.append(1)
                else:  # fall back, keeping the text pointer on this position
                    row_d.append(f[j])
                    row_s.append(j - f[j])
        delta.append(row_d)
        sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


def build_knuth_morris_pratt(
    pattern: Pattern | str, alphabet: Alphabet | str | None = None
) -> Machine:
    """Like Morris-Pratt but with the strong fallback table, which never
    re-compares a position against a pattern symbol known to mismatch."""
    pat = _as_pattern(pattern, alphabet)
    w = pat.text
    n = len(w)
    f = failure_function(w)
    fs = strong_failure_function(w)
    next_of = list(range(n))
    prematch = [j == n - 1 for j in range(n)]
    delta = []
    sigma = []
    for j in range(n):
        row_d, row_s = [], []
        for sym in pat.alphabet:
            if sym == w[j]:
                if j < n - 1:
                    row_d.append(j + 1)
                    row_s.append(0)
                else:
                    row_d.append(f[n])
                    row_s.append(n - f[n])
            else:
                if fs[j] >= 0:
                    row_d.append(fs[j])
                    row_s.append(j - fs[j])
                else:  # move the window past this position
                    row_d.append(0)
                    row_s.append(j + 1)
        delta.append(row_d)
        sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


def horspool_shift_table(pat: Pattern) -> dict[str, int]:
    """Shift by the distance from the last window position to the rightmost
    occurrence of the scanned symbol among the first |w|-1 pattern symbols."""
    w = pat.text
    n = len(w)
    table = {sym: n for sym in pat.alphabet}
    for i in range(n - 1):
        table[w[i]] = n - 1 - i
    return table


def build_horspool(
    pattern: Pattern | str, alphabet: Alphabet | str | None = None
) -> Machine:
    """Right-to-left window scan; on mismatch or full match, shift by the
    table entry for the symbol under the last window position (already read
    during this window's scan)."""
    pat = _as_pattern(pattern, alphabet)
    w = pat.text
    n = len(w)
    table = horspool_shift_table(pat)
    # phase j has compared j symbols (right to left); reads offset n-1-j
    next_of = [n - 1 - j for j in range(n)]
    prematch = [j == n - 1 for j in range(n)]
    last_sym_shift = table[w[n - 1]]
    delta = []
    sigma = []
    for j in range(n):
        off = n - 1 - j
        row_d, row_s = [], []
        for sym in pat.alphabet:
            if sym == w[off] and j < n - 1:
                row_d.append(j + 1)
                row_s.append(0)
            else:
                # window done (match or mismatch): shift by the table entry
                # for the symbol at the last window position.  In phase 0 that
                # symbol is the one just read; in later phases it matched
                # w[n-1] during phase 0.
                row_d.append(0)
                row_s.append(table[sym] if j == 0 else last_sym_shift)
        delta.append(row_d)
        sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


def quicksearch_shift_table(pat: Pattern) -> dict[str, int]:
    """Shift past the window based on the symbol just after it: distance from
    that lookahead position to the rightmost occurrence in the pattern, or
    |w|+1 when absent."""
    w = pat.text
    n = len(w)
    table = {sym: n + 1 for sym in pat.alphabet}
    for i in range(n):
        table[w[i]] = n - i
    return table


def build_quicksearch(
    pattern: Pattern | str, alphabet: Alphabet | str | None = None
) -> Machine:
    """Left-to-right window scan; after deciding the window (mismatch or full
    match), read the symbol just past the window and shift by its table entry.
    The lookahead makes this the one classic machine of order |w|."""
    pat = _as_pattern(pattern, alphabet)
    w = pat.text
    n = len(w)
    table = quicksearch_shift_table(pat)
    # states 0..n-1: window phases (read offset j); state n: lookahead state
    look = n
    next_of = [j for j in range(n)] + [n]
    prematch = [j == n - 1 for j in range(n)] + [False]
    delta = []
    sigma = []
    for j in range(n):
        row_d, row_s = [], []
        for sym in pat.alphabet:
            if sym == w[j] and j < n - 1:
                row_d.append(j + 1)
                row_s.append(0)
            else:
                # window decided (mismatch, or the completing read of a full
                # match): consult the lookahead position next
                row_d.append(look)
                row_s.append(0)
        delta.append(row_d)
        sigma.append(row_s)
    row_d, row_s = [], []
    for sym in pat.alphabet:
        row_d.append(0)
        row_s.append(table[sym])
    delta.append(row_d)
    sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


ALGORITHMS = {
    "naive": build_naive,
    "morris_pratt": build_morris_pratt,
    "knuth_morris_pratt": build_knuth_morris_pratt,
    "horspool": build_horspool,
    "quicksearch": build_quicksearch,
}

_ALIASES = {
    "mp": "morris_pratt",
    "kmp": "knuth_morris_pratt",
    "qs": "quicksearch",
}


def build_classic(
    alg: str, pattern: Pattern | str, alphabet: Alphabet | str | None = None
) -> Machine:
    """Build the machine for a classic algorithm by name (aliases: mp, kmp, qs)."""
    name = _ALIASES.get(alg, alg)
    builder = ALGORITHMS.get(name)
    if builder is None:
        raise MachineError(
            f"unknown algorithm {alg!r}; choose from {sorted(ALGORITHMS)} "
            f"or aliases {sorted(_ALIASES)}"
        )
    return builder(pattern, alphabet)
