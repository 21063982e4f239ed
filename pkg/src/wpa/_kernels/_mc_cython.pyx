# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel.

Mirrors mc_python.run_chunk proposal for proposal: same counter-stream
draws, same weight enumeration, same incremental update expressions with
one partial sum per output row. Compiled with FP contraction off so the
arithmetic stays operation-for-operation compatible with the numpy
fallback (see the backend notes in the README).
"""

from libc.math cimport tanh
from libc.string cimport memcpy

NAME = "cython"

ctypedef unsigned long long u64


cdef inline u64 mix64(u64 z) noexcept nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


cdef inline double u53(u64 key, u64 n) noexcept nogil:
    cdef u64 z = mix64(key + (n + 1) * 0x9E3779B97F4A7C15ULL)
    return <double>(z >> 11) * (1.0 / 9007199254740992.0)


def run_chunk(state, long nsteps):
    """Advance the chain by nsteps proposals, mutating state in place."""
    cdef list ws = state.net.weights
    cdef int L = len(ws)
    if L > 8:
        raise ValueError("compiled kernel supports at most 8 weight layers")

    cdef double* wp[8]
    cdef double* hp[8]
    cdef double* chp[8]
    cdef double* xp[8]
    cdef double* cxp[8]
    cdef double* dxp[8]
    cdef long nrows[8]
    cdef long ncols[8]
    cdef long offs[9]

    cdef double[:, ::1] tmp
    cdef int m
    for m in range(L):
        tmp = ws[m]
        wp[m] = &tmp[0, 0]
        nrows[m] = tmp.shape[0]
        ncols[m] = tmp.shape[1]
        tmp = state.hT[m]
        hp[m] = &tmp[0, 0]
        tmp = state.cand_h[m]
        chp[m] = &tmp[0, 0]
        offs[m] = state.offsets_list[m]
    offs[L] = state.offsets_list[L]
    for m in range(L - 1):
        tmp = state.xT[m]
        xp[m] = &tmp[0, 0]
        tmp = state.cand_x[m]
        cxp[m] = &tmp[0, 0]
        tmp = state.dx[m]
        dxp[m] = &tmp[0, 0]

    cdef double[:, ::1] x0v = state.x0T
    cdef double[:, ::1] yv = state.yT
    cdef double[::1] dxrowv = state.dxrow
    cdef double* x0p = &x0v[0, 0]
    cdef double* yp = &yv[0, 0]
    cdef double* dxrow = &dxrowv[0]

    cdef long P = x0v.shape[1]
    cdef long wtot = state.num_weights
    cdef double d = state.d
    cdef double k = state.k
    cdef double denom = state.denom
    cdef int act = state.act_code
    cdef u64 key = state.key
    cdef long t = state.t
    cdef double S = state.S
    cdef long accepted = state.accepted

    cdef long step, g, local, i, j, p, q, r, fi
    cdef int wl, mm
    cdef double u1, u2, v, dw, dS, acc, accq, hn, xn, y, mo, mn, wqi
    cdef double* prev
    cdef bint single

    with nogil:
        for step in range(nsteps):
            u1 = u53(key, 2 * <u64>t)
            u2 = u53(key, 2 * <u64>t + 1)
            g = <long>(u1 * wtot)
            wl = 0
            while g >= offs[wl + 1]:
                wl += 1
            local = g - offs[wl]
            i = local / ncols[wl]
            j = local - i * ncols[wl]
            v = 2.0 * u2 - 1.0
            dw = v - wp[wl][i * ncols[wl] + j]
            prev = xp[wl - 1] if wl > 0 else x0p

            if wl == L - 1:
                acc = 0.0
                for p in range(P):
                    hn = hp[wl][i * P + p] + dw * prev[j * P + p]
                    chp[wl][i * P + p] = hn
                    y = yp[i * P + p]
                    mo = hp[wl][i * P + p] * y - d
                    mn = hn * y - d
                    acc += mn * mn - mo * mo
                dS = acc / denom
            else:
                for p in range(P):
                    hn = hp[wl][i * P + p] + dw * prev[j * P + p]
                    chp[wl][i * P + p] = hn
                    if act == 1:
                        xn = tanh(k * hn)
                    else:
                        xn = k * hn
                    cxp[wl][i * P + p] = xn
                    dxrow[p] = xn - xp[wl][i * P + p]
                single = True
                fi = i
                dS = 0.0
                for mm in range(wl + 1, L):
                    if single:
                        for q in range(nrows[mm]):
                            wqi = wp[mm][q * ncols[mm] + fi]
                            for p in range(P):
                                chp[mm][q * P + p] = hp[mm][q * P + p] + wqi * dxrow[p]
                    else:
                        for r in range(ncols[mm]):
                            for p in range(P):
                                dxp[mm - 1][r * P + p] = cxp[mm - 1][r * P + p] - xp[mm - 1][r * P + p]
                        for q in range(nrows[mm]):
                            memcpy(chp[mm] + q * P, hp[mm] + q * P, P * sizeof(double))
                            for r in range(ncols[mm]):
                                wqi = wp[mm][q * ncols[mm] + r]
                                for p in range(P):
                                    chp[mm][q * P + p] += wqi * dxp[mm - 1][r * P + p]
                    if mm < L - 1:
                        for q in range(nrows[mm]):
                            for p in range(P):
                                if act == 1:
                                    cxp[mm][q * P + p] = tanh(k * chp[mm][q * P + p])
                                else:
                                    cxp[mm][q * P + p] = k * chp[mm][q * P + p]
                        single = False
                    else:
                        acc = 0.0
                        for q in range(nrows[mm]):
                            accq = 0.0
                            for p in range(P):
                                y = yp[q * P + p]
                                mo = hp[mm][q * P + p] * y - d
                                mn = chp[mm][q * P + p] * y - d
                                accq += mn * mn - mo * mo
                            acc += accq
                        dS = acc / denom

            if dS < 0.0:
                wp[wl][i * ncols[wl] + j] = v
                memcpy(hp[wl] + i * P, chp[wl] + i * P, P * sizeof(double))
                if wl < L - 1:
                    memcpy(xp[wl] + i * P, cxp[wl] + i * P, P * sizeof(double))
                    for mm in range(wl + 1, L):
                        memcpy(hp[mm], chp[mm], nrows[mm] * P * sizeof(double))
                        if mm < L - 1:
                            memcpy(xp[mm], cxp[mm], nrows[mm] * P * sizeof(double))
                S += dS
                accepted += 1
            t += 1

    state.t = t
    state.S = S
    state.accepted = accepted
