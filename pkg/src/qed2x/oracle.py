"""Exact small-system propagation in the full two-excitation number basis.

Independent of the amplitude-hierarchy integrator: the Hamiltonian of the
discretized emitter-photon model is assembled as a dense Hermitian matrix over
the basis {|e_a e_b>, |e_a 1_alpha>, |1_alpha 1_beta>, |2_alpha>} and
propagated by eigendecomposition. Only feasible for a handful of frequency
nodes; used to validate the hierarchy on small problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ecm import CouplingTensor
from .hierarchy import HierarchyState, empty_state, mode_frequencies

_MAX_MODES = 64
_SQRT2 = np.sqrt(2.0)


@dataclass
class TwoExcitationBasis:
    n: int                    # emitters
    m: int                    # photon modes (channels x nodes)

    def __post_init__(self):
        n, m = self.n, self.m
        self.pairs_ee = [(a, b) for a in range(n) for b in range(a + 1, n)]
        self.pairs_ph = [(al, be) for al in range(m) for be in range(al + 1, m)]
        self.idx_ee = {p: i for i, p in enumerate(self.pairs_ee)}
        off = len(self.pairs_ee)
        self.idx_eb = {(a, al): off + a * m + al
                       for a in range(n) for al in range(m)}
        off += n * m
        self.idx_pp = {p: off + i for i, p in enumerate(self.pairs_ph)}
        off += len(self.pairs_ph)
        self.idx_dbl = {al: off + al for al in range(m)}
        self.dim = off + m


def state_to_vector(state: HierarchyState, basis: TwoExcitationBasis) -> np.ndarray:
    """Map hierarchy amplitudes to the unit-normalized number-basis vector."""
    v = np.zeros(basis.dim, dtype=complex)
    for (a, b), i in basis.idx_ee.items():
        v[i] = state.c[a, b]
    for (a, al), i in basis.idx_eb.items():
        v[i] = state.b[a, al]
    for (al, be), i in basis.idx_pp.items():
        v[i] = state.d[al, be]
    for al, i in basis.idx_dbl.items():
        v[i] = state.d[al, al] / _SQRT2
    return v


def vector_to_state(v: np.ndarray, basis: TwoExcitationBasis, t: float = 0.0) -> HierarchyState:
    state = empty_state(basis.n, basis.m)
    state.t = t
    for (a, b), i in basis.idx_ee.items():
        state.c[a, b] = state.c[b, a] = v[i]
    for (a, al), i in basis.idx_eb.items():
        state.b[a, al] = v[i]
    for (al, be), i in basis.idx_pp.items():
        state.d[al, be] = state.d[be, al] = v[i]
    for al, i in basis.idx_dbl.items():
        state.d[al, al] = _SQRT2 * v[i]
    return state


def assemble_hamiltonian(coup: CouplingTensor) -> tuple[np.ndarray, TwoExcitationBasis]:
    """Dense Hermitian matrix of the discretized model (weighted couplings)."""
    n = coup.n_emitters
    m = n * coup.q
    if m > _MAX_MODES:
        raise ValueError(f"oracle limited to {_MAX_MODES} photon modes, got {m}")
    basis = TwoExcitationBasis(n=n, m=m)
    gt = coup.flat_weighted()              # (n, m), sqrt(w) g
    wa = coup.omega_atoms
    wal = mode_frequencies(coup)

    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for (a, b), i in basis.idx_ee.items():
        h[i, i] = wa[a] + wa[b]
    for (a, al), i in basis.idx_eb.items():
        h[i, i] = wa[a] + wal[al]
    for (al, be), i in basis.idx_pp.items():
        h[i, i] = wal[al] + wal[be]
    for al, i in basis.idx_dbl.items():
        h[i, i] = 2.0 * wal[al]

    # |e_a e_b>  <->  |e_a 1_alpha>: emitter b emits with amplitude g~_{b,alpha}
    for (a, b), i in basis.idx_ee.items():
        for al in range(m):
            j = basis.idx_eb[(a, al)]
            h[i, j] += gt[b, al]
            h[j, i] += np.conj(gt[b, al])
            j = basis.idx_eb[(b, al)]
            h[i, j] += gt[a, al]
            h[j, i] += np.conj(gt[a, al])

    # |e_a 1_alpha>  <->  two-photon states
    for (a, al), i in basis.idx_eb.items():
        for be in range(m):
            if be == al:
                j = basis.idx_dbl[al]
                h[i, j] += _SQRT2 * gt[a, al]
                h[j, i] += _SQRT2 * np.conj(gt[a, al])
            else:
                j = basis.idx_pp[(min(al, be), max(al, be))]
                h[i, j] += gt[a, be]
                h[j, i] += np.conj(gt[a, be])
    return h, basis


def exact_evolve(coup: CouplingTensor, state0: HierarchyState,
                 times: np.ndarray) -> list[HierarchyState]:
    """Propagate by eigendecomposition; returns the state at each time."""
    h, basis = assemble_hamiltonian(coup)
    vals, vecs = np.linalg.eigh(h)
    v0 = vecs.conj().T @ state_to_vector(state0, basis)
    out = []
    for t in np.atleast_1d(times):
        v = vecs @ (np.exp(-1j * vals * (t - state0.t)) * v0)
        out.append(vector_to_state(v, basis, t=float(t)))
    return out
