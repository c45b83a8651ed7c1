"""Pure-Python table fill for the norm recursion.

Mirrors ``_kernel.pyx`` operation for operation (same loop order, same
floating point expressions) so both backends produce identical tables.

Indices are positions in the support of ``x`` (0-based).  ``a..b`` is the
closed index interval, ``t`` indexes the size thresholds ``svals`` and ``k``
the constrained orders ``1 .. xi0-1`` (stored at ``k-1``).
"""
from __future__ import annotations

NEG = float("-inf")


class Tables:
    """Filled DP tables; see :func:`fill_tables` for the meaning of each."""

    __slots__ = ("n", "L", "U", "Q", "T", "Z", "G", "O", "R",
                 "complete_upto", "ops", "cells")

    def __init__(self, n, L):
        self.n = n
        self.L = L
        self.complete_upto = -1
        self.ops = 0
        self.cells = 0


def fill_tables(w, nx, dcap, svals, scap, theta, p_top, inv_pp, pk, budget):
    """Fill every table bottom-up.

    ``w``      absolute values on the support, in position order
    ``nx[j]``  first index whose position exceeds ``pos[j]**2`` (``n`` if none)
    ``dcap[i]`` ``min(pos[i], n)``, the admissibility cap on the child count
    ``svals``  size thresholds: ``svals[0] = 1``, ``svals[j+1] = pos[j] + 1``
    ``scap``   ``min(svals[t], n)`` as integers
    ``pk``     exponents ``p_1 .. p_{xi0-1}`` (all finite)

    Tables (``m = b - a + 1``):

    ``U[a][b]``        sup over all of W on ``x|[a..b]``
    ``Q[a][b]``        max over partitions of ``sum U^p_top`` (finite ``p_top`` only)
    ``T[a][b][d]``     max over partitions into at most ``d`` pieces of ``sum U``
    ``Z[a][b][t]``     best order-0 average form with size ``>= svals[t]``
    ``G[k-1][a][b][t]`` best functional of order ``< k`` with size ``>= svals[t]``
    ``O[k-1][a][b][t]`` best order-``k`` node with at least two children whose
                        first child has size ``>= svals[t]``
    ``R[k-1][b][j][r]`` best ``sum G^p_k`` of at most ``r`` further children
                        after a child ending at ``j``, staying inside ``..b``

    Threshold tables are only filled for ``t <= a``: a threshold handed to an
    interval always comes from a position left of it.
    """
    n = len(w)
    L = len(pk) + 1
    K = L - 1
    tab = Tables(n, L)
    finite_top = p_top != float("inf")

    U = [[0.0] * n for _ in range(n)]
    Q = [[0.0] * n for _ in range(n)]
    T = [[None] * n for _ in range(n)]
    Z = [[None] * n for _ in range(n)]
    G = [[[None] * n for _ in range(n)] for _ in range(K)]
    GP = [[[None] * n for _ in range(n)] for _ in range(K)]
    O = [[[None] * n for _ in range(n)] for _ in range(K)]
    R = [[[None] * n for _ in range(n)] for _ in range(K)]
    tab.U, tab.Q, tab.T, tab.Z, tab.G, tab.O, tab.R = U, Q, T, Z, G, O, R

    ops = 0
    for b in range(n):
        run = [[NEG] * (n + 1) for _ in range(K)]
        bm = 0.0
        for a in range(b, -1, -1):
            m = b - a + 1
            # continuation after a child ending at a
            for kk in range(K):
                gp = GP[kk]
                Rb = R[kk][b]
                cap = n - 1 - a
                row = [0.0] * (cap + 1)
                nxt = nx[a]
                if nxt <= b:
                    for r in range(1, cap + 1):
                        best = 0.0
                        for j2 in range(nxt, b + 1):
                            rest = Rb[j2]
                            rr = r - 1
                            if rr > len(rest) - 1:
                                rr = len(rest) - 1
                            v = gp[nxt][j2][a + 1] + rest[rr]
                            ops += 1
                            if v > best:
                                best = v
                        row[r] = best
                Rb[a] = row

            # order-k nodes: extend the running max over first-child starts >= a
            for kk in range(K):
                gp = GP[kk]
                Rb = R[kk][b]
                acc = run[kk]
                D = dcap[a]
                if D >= 2:
                    for j1 in range(a, b):
                        if nx[j1] > b:
                            continue
                        cont = Rb[j1]
                        rem = D - 1
                        if rem > len(cont) - 1:
                            rem = len(cont) - 1
                        tail = cont[rem]
                        g_row = gp[a][j1]
                        for t in range(a + 1):
                            v = g_row[t] + tail
                            ops += 1
                            if v > acc[t]:
                                acc[t] = v
                inv = 1.0 / pk[kk]
                orow = [0.0] * (a + 1)
                for t in range(a + 1):
                    if acc[t] > NEG:
                        orow[t] = theta * acc[t] ** inv
                O[kk][a][b] = orow

            # unconstrained best
            if w[a] > bm:
                bm = w[a]
            best = bm
            part = NEG
            if a < b:
                if finite_top:
                    for c in range(a, b):
                        v = U[a][c] ** p_top + Q[c + 1][b]
                        ops += 1
                        if v > part:
                            part = v
                    v0 = theta * part ** (1.0 / p_top)
                else:
                    v0 = U[a][b - 1]
                    if U[a + 1][b] > v0:
                        v0 = U[a + 1][b]
                    v0 = theta * v0
                if v0 > best:
                    best = v0
            for kk in range(K):
                v = O[kk][a][b][0]
                if v > best:
                    best = v
            U[a][b] = best
            if finite_top:
                q = best ** p_top
                if part > q:
                    q = part
                Q[a][b] = q

            # at most d pieces
            trow = [0.0] * (m + 1)
            trow[1] = best
            for d in range(2, m + 1):
                v = trow[d - 1]
                for c in range(a, b):
                    sub = T[c + 1][b]
                    dd = d - 1
                    if dd > len(sub) - 1:
                        dd = len(sub) - 1
                    cand = U[a][c] + sub[dd]
                    ops += 1
                    if cand > v:
                        v = cand
                trow[d] = v
            T[a][b] = trow

            # sized averages and the order-< k tables
            zrow = [0.0] * (a + 1)
            for t in range(a + 1):
                s = svals[t]
                sc = scap[t]
                ms = sc if sc < m else m
                v = s ** (-inv_pp) * trow[ms]
                for d in range(sc + 1, m + 1):
                    cand = float(d) ** (-inv_pp) * trow[d]
                    ops += 1
                    if cand > v:
                        v = cand
                zrow[t] = theta * v
            Z[a][b] = zrow
            g = zrow
            for kk in range(K):
                if kk > 0:
                    prev_o = O[kk - 1][a][b]
                    g = [g[t] if g[t] >= prev_o[t] else prev_o[t] for t in range(a + 1)]
                G[kk][a][b] = g
                e = pk[kk]
                GP[kk][a][b] = [v ** e for v in g]

            tab.cells += 1
        tab.complete_upto = b
        tab.ops = ops
        if ops > budget and b < n - 1:
            break
    return tab
