"""Independent reference implementations the suite checks machines against.

Everything here is coded directly from the classic algorithm descriptions —
no imports from the package under test — so agreement is meaningful.  Each
scanner returns (occurrences, accesses): the reported window positions and
the exact sequence of absolute text indices read.  All scanners stop once the
window can no longer fit (p > |t|-|w|), and quicksearch additionally stops
when its lookahead would fall past the end of the text, without counting
that access.
"""

from __future__ import annotations


def occurrences(w: str, t: str) -> list[int]:
    """Every window position where w occurs in t, by direct comparison."""
    return [p for p in range(len(t) - len(w) + 1) if t[p : p + len(w)] == w]


def borders(w: str) -> list[int]:
    """f[j] = length of the longest proper border of w[:j], checked directly
    (quadratic on purpose: simplicity over speed)."""
    m = len(w)
    f = [0] * (m + 1)
    for j in range(1, m + 1):
        for b in range(j - 1, 0, -1):
            if w[:b] == w[j - b : j]:
                f[j] = b
                break
    return f


def strong_borders(w: str) -> list[int]:
    """fs[j] = largest border length b of w[:j] whose next symbol differs
    from w[j] (so re-comparing is pointless), or -1 when the window should
    move past position j entirely."""
    m = len(w)
    fs = [-1] * m
    for j in range(1, m):
        for b in range(j - 1, -1, -1):
            if w[:b] == w[j - b : j] and w[b] != w[j]:
                fs[j] = b
                break
    return fs


def naive_scan(w: str, t: str):
    occ, acc = [], []
    m, n = len(w), len(t)
    p = 0
    while p <= n - m:
        for j in range(m):
            acc.append(p + j)
            if t[p + j] != w[j]:
                break
        else:
            occ.append(p)
        p += 1
    return occ, acc


def morris_pratt_scan(w: str, t: str):
    occ, acc = [], []
    m, n = len(w), len(t)
    f = borders(w)
    p, j = 0, 0
    while p <= n - m:
        acc.append(p + j)
        if t[p + j] == w[j]:
            j += 1
            if j == m:
                occ.append(p)
                p, j = p + m - f[m], f[m]
        elif j == 0:
            p += 1
        else:
            # fall back to the longest border; the same text index is
            # compared again on the next iteration
            p, j = p + j - f[j], f[j]
    return occ, acc


def knuth_morris_pratt_scan(w: str, t: str):
    occ, acc = [], []
    m, n = len(w), len(t)
    f = borders(w)
    fs = strong_borders(w)
    p, j = 0, 0
    while p <= n - m:
        acc.append(p + j)
        if t[p + j] == w[j]:
            j += 1
            if j == m:
                occ.append(p)
                p, j = p + m - f[m], f[m]
        elif fs[j] >= 0:
            p, j = p + j - fs[j], fs[j]
        else:
            p, j = p + j + 1, 0
    return occ, acc


def horspool_scan(w: str, t: str):
    occ, acc = [], []
    m, n = len(w), len(t)
    table = {c: m for c in set(t) | set(w)}
    for i in range(m - 1):
        table[w[i]] = m - 1 - i
    p = 0
    while p <= n - m:
        last = t[p + m - 1]
        matched = True
        for j in range(m):  # right to left
            pos = p + m - 1 - j
            acc.append(pos)
            if t[pos] != w[m - 1 - j]:
                matched = False
                break
        if matched:
            occ.append(p)
        p += table[last]
    return occ, acc


def quicksearch_scan(w: str, t: str):
    occ, acc = [], []
    m, n = len(w), len(t)
    table = {c: m + 1 for c in set(t) | set(w)}
    for i in range(m):
        table[w[i]] = m - i
    p = 0
    while p <= n - m:
        matched = True
        for j in range(m):
            acc.append(p + j)
            if t[p + j] != w[j]:
                matched = False
                break
        if matched:
            occ.append(p)
        if p + m >= n:  # the deciding lookahead would fall off the text
            break
        acc.append(p + m)
        p += table[t[p + m]]
    return occ, acc


SCANNERS = {
    "naive": naive_scan,
    "morris_pratt": morris_pratt_scan,
    "knuth_morris_pratt": knuth_morris_pratt_scan,
    "horspool": horspool_scan,
    "quicksearch": quicksearch_scan,
}
