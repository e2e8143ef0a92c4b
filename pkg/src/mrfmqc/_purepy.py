"""Numpy reference kernels, used when the compiled extension is absent."""

import numpy as np


def rotate_pairs(amps, bit, detuning, rabi, phase, duration):
    """Rotate every amplitude pair that differs only in ``bit``, in place.

    Pair ``p`` couples indices ``i0`` (bit clear, lower level) and
    ``i0 | 1 << bit``. Each pair gets the rectangular-pulse propagator
    ``exp(-i pi tau (rabi (cos phi X + sin phi Y) + detuning Z))`` with its
    own detuning; frequencies are in Hz, ``duration`` in seconds.
    """
    npairs = amps.shape[0] // 2
    detuning = np.asarray(detuning, dtype=np.float64)
    if detuning.shape[0] != npairs:
        raise ValueError("detuning length must equal the number of pairs")
    stride = 1 << bit
    p = np.arange(npairs)
    i0 = ((p >> bit) << (bit + 1)) | (p & (stride - 1))
    i1 = i0 | stride

    wg = np.sqrt(rabi * rabi + detuning * detuning)
    theta = np.pi * wg * duration
    c = np.cos(theta)
    s = np.sin(theta)
    nz = detuning / wg
    nxy = rabi / wg
    u00 = c - 1j * s * nz
    u11 = c + 1j * s * nz
    u01 = -1j * s * nxy * np.exp(-1j * phase)
    u10 = -1j * s * nxy * np.exp(1j * phase)

    a0 = amps[i0].copy()
    a1 = amps[i1].copy()
    amps[i0] = u00 * a0 + u01 * a1
    amps[i1] = u10 * a0 + u11 * a1


def dipole_fields(signs, per_pair):
    """Field at every site from all other sites, ``per_pair * sum s_k / |j-k|^3``."""
    signs = np.asarray(signs, dtype=np.float64)
    n = signs.shape[0]
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    np.fill_diagonal(dist, np.inf)
    return per_pair * ((1.0 / dist**3) @ signs)
