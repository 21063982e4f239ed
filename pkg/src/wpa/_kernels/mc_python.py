"""Pure-numpy Monte Carlo kernel (fallback backend).

Operates on the trainer's cache state (duck-typed; see trainer.McState).
The compiled backend implements the same step semantics; numerical parity
notes live in the package README. Accumulation over output neurons uses one
partial sum per output row, combined in row order, so both backends agree
bitwise whenever per-row numpy sums are sequential (row length < 8).
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from ..rng import uniform

NAME = "python"


def _hidden_row(act_code: int, k: float, h: np.ndarray) -> np.ndarray:
    if act_code == 1:
        return np.tanh(k * h)
    return k * h


def delta_and_stage(state, wl: int, i: int, j: int, dw: float) -> float:
    """Cost change of setting weights[wl][i, j] += dw; candidates staged.

    Candidate activations for every affected layer are left in the state's
    cand_h / cand_x scratch buffers so commit_staged can apply them.
    """
    ws = state.net.weights
    L = len(ws)
    d = state.d
    denom = state.denom
    prev_row = state.xT[wl - 1][j] if wl > 0 else state.x0T[j]
    h_row = state.hT[wl][i]
    hn = h_row + dw * prev_row
    state.cand_h[wl][i] = hn

    if wl == L - 1:
        y = state.yT[i]
        mo = h_row * y - d
        mn = hn * y - d
        return float(np.sum(mn * mn - mo * mo)) / denom

    xi = _hidden_row(state.act_code, state.k, hn)
    state.cand_x[wl][i] = xi
    state.dxrow[:] = xi - state.xT[wl][i]
    single = True
    for m in range(wl + 1, L):
        W = ws[m]
        if single:
            np.multiply(W[:, i, None], state.dxrow[None, :], out=state.cand_h[m])
            state.cand_h[m] += state.hT[m]
        else:
            np.subtract(state.cand_x[m - 1], state.xT[m - 1], out=state.dx[m - 1])
            np.matmul(W, state.dx[m - 1], out=state.cand_h[m])
            state.cand_h[m] += state.hT[m]
        if m < L - 1:
            state.cand_x[m][:] = _hidden_row(state.act_code, state.k,
                                             state.cand_h[m])
            single = False
        else:
            acc = 0.0
            for q in range(ws[L - 1].shape[0]):
                y = state.yT[q]
                mo = state.hT[m][q] * y - d
                mn = state.cand_h[m][q] * y - d
                acc += float(np.sum(mn * mn - mo * mo))
            return acc / denom
    raise AssertionError("unreachable")


def commit_staged(state, wl: int, i: int, j: int, new_value: float) -> None:
    """Apply the candidates staged by the most recent delta_and_stage."""
    ws = state.net.weights
    L = len(ws)
    ws[wl][i, j] = new_value
    state.hT[wl][i] = state.cand_h[wl][i]
    if wl < L - 1:
        state.xT[wl][i] = state.cand_x[wl][i]
        for m in range(wl + 1, L):
            state.hT[m][:] = state.cand_h[m]
            if m < L - 1:
                state.xT[m][:] = state.cand_x[m]


def run_chunk(state, nsteps: int) -> None:
    """Advance the chain by nsteps proposals, mutating state in place."""
    ws = state.net.weights
    offsets = state.offsets_list
    wtot = state.num_weights
    key = state.key
    ncols = [w.shape[1] for w in ws]
    for _ in range(nsteps):
        t = state.t
        u1 = uniform(key, 2 * t)
        u2 = uniform(key, 2 * t + 1)
        g = int(u1 * wtot)
        wl = bisect_right(offsets, g) - 1
        local = g - offsets[wl]
        i = local // ncols[wl]
        j = local - i * ncols[wl]
        v = 2.0 * u2 - 1.0
        dw = v - ws[wl][i, j]
        dS = delta_and_stage(state, wl, i, j, dw)
        if dS < 0.0:
            commit_staged(state, wl, i, j, v)
            state.S += dS
            state.accepted += 1
        state.t = t + 1
