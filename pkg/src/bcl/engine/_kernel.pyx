# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled table fill for the norm recursion.

A line-by-line mirror of ``_kernel_py.fill_tables``: same loop order, same
floating point expressions (``pow`` from libm, no fast-math), so both
backends produce bit-identical tables.  Tables are dense numpy arrays; the
entries the pure-Python kernel leaves out (``t > a``, ragged tails) are
never read.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, INFINITY

cnp.import_array()


class Tables:
    """Filled DP tables; same fields and meaning as the pure-Python kernel."""

    def __init__(self, n, L):
        self.n = n
        self.L = L
        self.complete_upto = -1
        self.ops = 0
        self.cells = 0


def fill_tables(w_in, nx_in, dcap_in, svals_in, scap_in, double theta, double p_top,
                double inv_pp, pk_in, long long budget):
    cdef Py_ssize_t n = len(w_in)
    cdef Py_ssize_t K = len(pk_in)
    tab = Tables(n, K + 1)
    cdef bint finite_top = p_top != INFINITY

    cdef double[::1] w = np.asarray(w_in, dtype=np.float64)
    cdef long long[::1] nx = np.asarray(nx_in, dtype=np.int64)
    cdef long long[::1] dcap = np.asarray(dcap_in, dtype=np.int64)
    cdef double[::1] svals = np.asarray(svals_in, dtype=np.float64)
    cdef long long[::1] scap = np.asarray(scap_in, dtype=np.int64)
    cdef double[::1] pk = np.asarray(pk_in, dtype=np.float64)

    Ua = np.zeros((n, n))
    Qa = np.zeros((n, n))
    Ta = np.zeros((n, n, n + 1))
    Za = np.zeros((n, n, n))
    Ga = np.zeros((K, n, n, n))
    GPa = np.zeros((K, n, n, n))
    Oa = np.zeros((K, n, n, n))
    Ra = np.zeros((K, n, n, n))
    cdef double[:, ::1] U = Ua
    cdef double[:, ::1] Q = Qa
    cdef double[:, :, ::1] T = Ta
    cdef double[:, :, ::1] Z = Za
    cdef double[:, :, :, ::1] G = Ga
    cdef double[:, :, :, ::1] GP = GPa
    cdef double[:, :, :, ::1] O = Oa
    cdef double[:, :, :, ::1] R = Ra
    run_a = np.empty((K, n + 1))
    cdef double[:, ::1] run = run_a

    cdef long long ops = 0
    cdef long long cells = 0
    cdef Py_ssize_t a, b, m, kk, r, j1, j2, t, c, d, dd, rr, cap, nxt, rem, D, sc, ms
    cdef double best, v, bm, part, v0, q, inv, cand, s, tail, e
    cdef Py_ssize_t complete = -1

    for b in range(n):
        run[:, :] = -INFINITY
        bm = 0.0
        for a in range(b, -1, -1):
            m = b - a + 1
            # continuation after a child ending at a
            for kk in range(K):
                cap = n - 1 - a
                for r in range(cap + 1):
                    R[kk, b, a, r] = 0.0
                nxt = nx[a]
                if nxt <= b:
                    for r in range(1, cap + 1):
                        best = 0.0
                        for j2 in range(nxt, b + 1):
                            rr = r - 1
                            if rr > n - 1 - j2:
                                rr = n - 1 - j2
                            v = GP[kk, nxt, j2, a + 1] + R[kk, b, j2, rr]
                            ops += 1
                            if v > best:
                                best = v
                        R[kk, b, a, r] = best

            # order-k nodes: running max over first-child starts >= a
            for kk in range(K):
                D = dcap[a]
                if D >= 2:
                    for j1 in range(a, b):
                        if nx[j1] > b:
                            continue
                        rem = D - 1
                        if rem > n - 1 - j1:
                            rem = n - 1 - j1
                        tail = R[kk, b, j1, rem]
                        for t in range(a + 1):
                            v = GP[kk, a, j1, t] + tail
                            ops += 1
                            if v > run[kk, t]:
                                run[kk, t] = v
                inv = 1.0 / pk[kk]
                for t in range(a + 1):
                    if run[kk, t] > -INFINITY:
                        O[kk, a, b, t] = theta * pow(run[kk, t], inv)
                    else:
                        O[kk, a, b, t] = 0.0

            # unconstrained best
            if w[a] > bm:
                bm = w[a]
            best = bm
            part = -INFINITY
            if a < b:
                if finite_top:
                    for c in range(a, b):
                        v = pow(U[a, c], p_top) + Q[c + 1, b]
                        ops += 1
                        if v > part:
                            part = v
                    v0 = theta * pow(part, 1.0 / p_top)
                else:
                    v0 = U[a, b - 1]
                    if U[a + 1, b] > v0:
                        v0 = U[a + 1, b]
                    v0 = theta * v0
                if v0 > best:
                    best = v0
            for kk in range(K):
                v = O[kk, a, b, 0]
                if v > best:
                    best = v
            U[a, b] = best
            if finite_top:
                q = pow(best, p_top)
                if part > q:
                    q = part
                Q[a, b] = q

            # at most d pieces
            T[a, b, 0] = 0.0
            T[a, b, 1] = best
            for d in range(2, m + 1):
                v = T[a, b, d - 1]
                for c in range(a, b):
                    dd = d - 1
                    if dd > b - c:
                        dd = b - c
                    cand = U[a, c] + T[c + 1, b, dd]
                    ops += 1
                    if cand > v:
                        v = cand
                T[a, b, d] = v

            # sized averages and the order-< k tables
            for t in range(a + 1):
                s = svals[t]
                sc = scap[t]
                ms = sc if sc < m else m
                v = pow(s, -inv_pp) * T[a, b, ms]
                for d in range(sc + 1, m + 1):
                    cand = pow(<double>d, -inv_pp) * T[a, b, d]
                    ops += 1
                    if cand > v:
                        v = cand
                Z[a, b, t] = theta * v
            for kk in range(K):
                e = pk[kk]
                for t in range(a + 1):
                    if kk == 0:
                        v = Z[a, b, t]
                    else:
                        v = G[kk - 1, a, b, t]
                        if not (v >= O[kk - 1, a, b, t]):
                            v = O[kk - 1, a, b, t]
                    G[kk, a, b, t] = v
                    GP[kk, a, b, t] = pow(v, e)

            cells += 1
        complete = b
        if ops > budget and b < n - 1:
            break

    tab.U, tab.Q, tab.T, tab.Z = Ua, Qa, Ta, Za
    tab.G, tab.O, tab.R = Ga, Oa, Ra
    tab.complete_upto = complete
    tab.ops = ops
    tab.cells = cells
    return tab
