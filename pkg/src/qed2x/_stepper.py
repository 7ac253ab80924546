"""Fused single-core kernels for the two-excitation RK4 hot loop.

The two-photon sector dominates the cost (dense M x M with M = N*Q), so its
right-hand side is evaluated in one pass over the upper triangle and mirrored,
which also keeps the matrix exactly symmetric in floating point.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def d_sector_rhs(d, bf, gtc, w_alpha, out):
    """out = -i [ (w_i + w_j) d_ij + sum_a (bf_ai gtc_aj + bf_aj gtc_ai) ], symmetric."""
    m = d.shape[0]
    n = bf.shape[0]
    for i in range(m):
        wi = w_alpha[i]
        for j in range(i, m):
            s = 0.0 + 0.0j
            for a in range(n):
                s += bf[a, i] * gtc[a, j] + bf[a, j] * gtc[a, i]
            v = -1j * ((wi + w_alpha[j]) * d[i, j] + s)
            out[i, j] = v
            out[j, i] = v


@njit(cache=True, fastmath=True)
def d_sector_combine(d, p, w_alpha, out):
    """out = -i [ (w_i + w_j) d_ij + p_ij + p_ji ] with p = bf^T gtc.

    Tiled so the transposed reads of p stay cache-resident; both triangles are
    written from the same value, keeping out exactly symmetric in floating
    point."""
    m = d.shape[0]
    tile = 64
    for i0 in range(0, m, tile):
        i1 = min(i0 + tile, m)
        for j0 in range(i0, m, tile):
            j1 = min(j0 + tile, m)
            for i in range(i0, i1):
                wi = w_alpha[i]
                js = j0 if j0 > i else i
                for j in range(js, j1):
                    v = (wi + w_alpha[j]) * d[i, j] + p[i, j] + p[j, i]
                    r = v.imag - 1j * v.real
                    out[i, j] = r
                    out[j, i] = r


@njit(cache=True)
def axpy(out, y, k, a):
    """out = y + a * k on flat complex vectors."""
    for i in range(y.size):
        out[i] = y[i] + a * k[i]


@njit(cache=True)
def rk4_combine(y, k1, k2, k3, k4, h6):
    """y += h/6 * (k1 + 2 k2 + 2 k3 + k4)."""
    for i in range(y.size):
        y[i] = y[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True)
def sym_norms(d):
    """(||d||_F^2, ||d - d^T||_F^2) in one pass over the upper triangle."""
    m = d.shape[0]
    fro2 = 0.0
    asym2 = 0.0
    for i in range(m):
        x = d[i, i]
        fro2 += x.real * x.real + x.imag * x.imag
        for j in range(i + 1, m):
            u = d[i, j]
            v = d[j, i]
            fro2 += 2.0 * (u.real * u.real + u.imag * u.imag)
            dr = u.real - v.real
            di = u.imag - v.imag
            asym2 += 2.0 * (dr * dr + di * di)
    return fro2, asym2
