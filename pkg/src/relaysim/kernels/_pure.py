"""NumPy implementations of the hot kernels.

These are the reference/fallback versions of the compiled core in
``_speed.pyx``; both expose the same four functions and must agree to
floating-point round-off.
"""
from __future__ import annotations

import numpy as np


def cis(theta: np.ndarray) -> np.ndarray:
    """exp(1j*theta) for real theta, via separate cos/sin (faster than complex exp)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty(theta.shape, dtype=np.complex128)
    out.real = np.cos(theta)
    out.imag = np.sin(theta)
    return out


def upa_phases(alpha: np.ndarray, beta: np.ndarray, n_h: int, n_v: int) -> np.ndarray:
    """Plane-wave phase table of a uniform planar array.

    Entry [iv*n_h + ih, r] = exp(j*(ih*alpha[r] + iv*beta[r])) for R directions.
    Row-major over (iv, ih), matching the element indexing used everywhere.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    u = cis(np.outer(np.arange(n_h), alpha))      # (n_h, R)
    v = cis(np.outer(np.arange(n_v), beta))       # (n_v, R)
    return (v[:, None, :] * u[None, :, :]).reshape(n_h * n_v, alpha.size)


def _phasor_table(pha: np.ndarray, phb: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """exp(j*(pha[n] + phb[n]*f)) as an (N, F) table.

    Uniform frequency grids (the usual case) are filled by a per-row phasor
    recurrence: two transcendental calls per row instead of one per entry.
    """
    n_f = freqs.size
    if n_f > 2:
        step = freqs[1] - freqs[0]
        uniform = np.max(np.abs(np.diff(freqs) - step)) < 1e-9 * abs(step)
    else:
        uniform = False
    if not uniform:
        return cis(pha[:, None] + np.outer(phb, freqs))
    base = cis(pha + phb * freqs[0])
    rot = cis(phb * step)
    table = np.empty((pha.size, n_f), dtype=np.complex128)
    table[:, 0] = base
    np.cumprod(np.broadcast_to(rot[:, None], (pha.size, n_f - 1)),
               axis=1, out=table[:, 1:])
    table[:, 1:] *= base[:, None]
    return table


def cascade_response(L: np.ndarray,
                     pha_rd: np.ndarray, phb_rd: np.ndarray,
                     pha_sr: np.ndarray, phb_sr: np.ndarray,
                     freqs: np.ndarray) -> np.ndarray:
    """Per-subband complex response of a relayed link.

    r[f] = sum_{n,m} L[n,m] * exp(j*(pha_rd[n] + phb_rd[n]*f))
                            * exp(j*(pha_sr[m] + phb_sr[m]*f))

    where pha_* carry the time (Doppler) phases and phb_* the delay slopes.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    p_rd = _phasor_table(np.asarray(pha_rd, float), np.asarray(phb_rd, float), freqs)
    p_sr = _phasor_table(np.asarray(pha_sr, float), np.asarray(phb_sr, float), freqs)
    return ((p_rd.T @ L) * p_sr.T).sum(axis=1)


def direct_response(L: np.ndarray, pha: np.ndarray, phb: np.ndarray,
                    freqs: np.ndarray) -> np.ndarray:
    """Single-hop analogue of :func:`cascade_response` (L is a vector)."""
    freqs = np.asarray(freqs, dtype=np.float64)
    p = _phasor_table(np.asarray(pha, float), np.asarray(phb, float), freqs)
    return L @ p
