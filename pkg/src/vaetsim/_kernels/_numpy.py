"""Pure-numpy reference implementation of the stepping kernels.

Both backends share these contracts:

* ``propagate_states(prop, states, fock_dim, out)`` advances a bundle of
  weighted pure-state columns ``states`` (d x r, Fortran order) by
  repeated application of ``prop`` (d x d), renormalizing the ensemble
  trace to one after every step.  ``out`` is an (n_records, 7) float64
  array; row k holds the observables after k applications, columns
  ``[p_ee, p_eg, p_ge, p_gg, raw_trace, mean_phonon, top_fock_weight]``
  where raw_trace is the ensemble trace before that step's
  renormalization.  The final normalized states are written back into
  ``states``.

* ``lindblad_strang(prop, rho, fock_dim, gamma_dt, out)`` advances a
  dense density matrix by Strang-split steps: exact acceptor
  amplitude-damping for half a step, conjugation by ``prop``, damping for
  the second half; the trace is renormalized to one each step and
  recorded as above.  With ``gamma_dt = 0`` the step reduces exactly to
  the conjugation.

Basis layout: row index = dimer level (0 ee, 1 eg, 2 ge, 3 gg) times
``fock_dim`` plus phonon number.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

N_OBS = 7  # p_ee, p_eg, p_ge, p_gg, raw_trace, mean_phonon, top_fock


def _record(row_weights: np.ndarray, fock_dim: int, raw: float, out_row: np.ndarray):
    blocks = row_weights.reshape(4, fock_dim)
    total = row_weights.sum()
    pops = blocks.sum(axis=1) / total
    per_n = blocks.sum(axis=0)
    out_row[0:4] = pops
    out_row[4] = raw
    out_row[5] = (per_n @ np.arange(fock_dim)) / total
    out_row[6] = per_n[fock_dim - 1] / total


def propagate_states(prop, states, fock_dim, out):
    d, _ = states.shape
    if d % fock_dim or d // fock_dim != 4:
        raise ValueError(f"state dimension {d} is not 4 * fock_dim ({fock_dim})")
    n_steps = out.shape[0] - 1

    prop_c = np.ascontiguousarray(prop, dtype=np.complex128)
    cur = np.array(states, dtype=np.complex128, order="C", copy=True)
    nxt = np.empty_like(cur)
    w = (cur.real ** 2 + cur.imag ** 2).sum(axis=1)
    tr = w.sum()
    _record(w, fock_dim, tr, out[0])
    cur *= 1.0 / np.sqrt(tr)

    for k in range(1, n_steps + 1):
        np.matmul(prop_c, cur, out=nxt)
        w = (nxt.real ** 2 + nxt.imag ** 2).sum(axis=1)
        tr = w.sum()
        _record(w, fock_dim, tr, out[k])
        nxt *= 1.0 / np.sqrt(tr)
        cur, nxt = nxt, cur

    states[...] = cur


def _damp_half(rho, fock_dim, gamma_tau):
    """Exact amplitude-damping semigroup on the acceptor for time tau.

    Acceptor-excited dimer levels are 0 (ee) and 2 (ge); the lowering
    operator maps level b to b+1 at fixed phonon number.  The
    excited-excited blocks feed the ground-ground blocks before being
    scaled, mixed blocks pick up the square-root factor.
    """
    n = fock_dim
    f = np.exp(-gamma_tau)
    sf = np.exp(-0.5 * gamma_tau)
    sl = [slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n), slice(3 * n, 4 * n)]
    exc = (0, 2)
    gnd = (1, 3)
    for bi in exc:
        for bj in exc:
            rho[sl[bi + 1], sl[bj + 1]] += (1.0 - f) * rho[sl[bi], sl[bj]]
            rho[sl[bi], sl[bj]] *= f
    for bi in exc:
        for bj in gnd:
            rho[sl[bi], sl[bj]] *= sf
            rho[sl[bj], sl[bi]] *= sf


def lindblad_strang(prop, rho, fock_dim, gamma_dt, out):
    d = rho.shape[0]
    if d % fock_dim or d // fock_dim != 4:
        raise ValueError(f"state dimension {d} is not 4 * fock_dim ({fock_dim})")
    n_steps = out.shape[0] - 1
    prop_c = np.ascontiguousarray(prop, dtype=np.complex128)
    prop_h = np.ascontiguousarray(prop_c.conj().T)
    work = np.array(rho, dtype=np.complex128, order="C", copy=True)

    diag = np.real(np.diag(work)).copy()
    tr = diag.sum()
    _record(diag, fock_dim, tr, out[0])
    work *= 1.0 / tr

    tmp = np.empty_like(work)
    for k in range(1, n_steps + 1):
        if gamma_dt > 0.0:
            _damp_half(work, fock_dim, 0.5 * gamma_dt)
        np.matmul(prop_c, work, out=tmp)
        np.matmul(tmp, prop_h, out=work)
        if gamma_dt > 0.0:
            _damp_half(work, fock_dim, 0.5 * gamma_dt)
        diag = np.real(np.diag(work)).copy()
        tr = diag.sum()
        _record(diag, fock_dim, tr, out[k])
        work *= 1.0 / tr
    rho[...] = work
