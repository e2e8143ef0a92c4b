"""Pulse-level simulation of the donor chain in the secular approximation.

Every coupling in the chain (hyperfine, tip, electron dipolar) is diagonal
in the z basis, so it only shifts transition frequencies. A pulse then acts
on its addressed spin as an independent two-level rotation for each
z-configuration of all other spins, with a configuration-dependent
detuning. The state is kept in the frame co-rotating with every
conditional resonance, in which free evolution between pulses is the
identity and tip moves are instantaneous.

Basis
-----
Amplitudes are indexed by 2N bits, site-major, electron before nuclear:
``[e0, n0, e1, n1, ...]`` with ``e0`` the most significant bit. Bit 0 is
the ground level (``Spin.UP``), bit 1 the excited level.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .fields import TipPosition, pair_field, tip_field_z
from .spinmodel import Spin

MAX_SITES = 6
ELECTRON, NUCLEAR = "electron", "nuclear"
BASIS_ORDER = "site-major; per site (electron, nuclear); bit 0 = up/ground first"
_KIND_OFFSET = {ELECTRON: 0, NUCLEAR: 1}


def _bit(n_sites, site, kind):
    return 2 * n_sites - 1 - (2 * site + _KIND_OFFSET[kind])


def site_bits(index, n_sites):
    """``(electrons, nuclei)`` of a basis index as tuples of :class:`Spin`."""
    electrons = tuple(Spin((index >> _bit(n_sites, k, ELECTRON)) & 1) for k in range(n_sites))
    nuclei = tuple(Spin((index >> _bit(n_sites, k, NUCLEAR)) & 1) for k in range(n_sites))
    return electrons, nuclei


def basis_index(electrons, nuclei):
    n = len(electrons)
    if len(nuclei) != n:
        raise ValueError("electron and nuclear configs differ in length")
    index = 0
    for k in range(n):
        index |= int(Spin(electrons[k])) << _bit(n, k, ELECTRON)
        index |= int(Spin(nuclei[k])) << _bit(n, k, NUCLEAR)
    return index


def basis_label(index, n_sites):
    """e.g. ``'uu|ud|uu'``: per site electron then nuclear, u = up, d = down."""
    electrons, nuclei = site_bits(index, n_sites)
    ch = {Spin.UP: "u", Spin.DOWN: "d"}
    return "|".join(ch[e] + ch[n] for e, n in zip(electrons, nuclei))


@dataclass(frozen=True)
class ChainState:
    """Pure state of an N-site chain, dimension 4**N."""

    n_sites: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in [1, {MAX_SITES}]")
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (4**self.n_sites,):
            raise ValueError(f"expected {4**self.n_sites} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, electrons, nuclei):
        n = len(electrons)
        amps = np.zeros(4**n, dtype=np.complex128)
        amps[basis_index(electrons, nuclei)] = 1.0
        return cls(n, amps)

    @classmethod
    def ground(cls, n_sites):
        return cls.basis((Spin.UP,) * n_sites, (Spin.UP,) * n_sites)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def label(self, index):
        return basis_label(index, self.n_sites)

    def __add__(self, other):
        return ChainState(self.n_sites, self.amplitudes + other.amplitudes)

    def __rmul__(self, scalar):
        return ChainState(self.n_sites, scalar * self.amplitudes)


@dataclass(frozen=True)
class TransitionResonance:
    site: int
    spin_kind: str
    conditioning: str
    frequency: float


def conditional_resonances(geometry, params, tip, site, kind, indices):
    """Secular resonance of spin (``site``, ``kind``) for each basis index.

    Includes B0, the tip field at the site, every other electron's dipolar
    field and the on-site hyperfine term set by the partner spin. The
    addressed spin's own bit is irrelevant.
    """
    n = geometry.n_sites
    site = geometry.check_site(site)
    indices = np.asarray(indices, dtype=np.int64)
    ebits = np.stack([(indices >> _bit(n, k, ELECTRON)) & 1 for k in range(n)], axis=-1)
    signs = 1.0 - 2.0 * ebits
    dist = np.abs(np.arange(n) - site).astype(float)
    dist[site] = np.inf
    couplings = pair_field(geometry, params) / dist**3
    dip = signs @ couplings
    b = geometry.external_field_B0 + tip_field_z(geometry, tip, site) + dip
    a = params.hyperfine_A_over_h
    if kind == ELECTRON:
        m_partner = ((indices >> _bit(n, site, NUCLEAR)) & 1) - 0.5
        return np.abs(params.gamma_e * b - a * m_partner)
    if kind == NUCLEAR:
        m_partner = ((indices >> _bit(n, site, ELECTRON)) & 1) - 0.5
        return np.abs(params.gamma_n_eff * b - a * m_partner)
    raise ValueError(f"unknown spin kind {kind!r}")


def resonance_table(geometry, params, tip, index):
    """All 2N transition frequencies for one basis configuration."""
    n = geometry.n_sites
    label = basis_label(index, n)
    table = []
    for site in range(n):
        for kind in (ELECTRON, NUCLEAR):
            f = conditional_resonances(geometry, params, tip, site, kind, [index])[0]
            table.append(TransitionResonance(site, kind, label, float(f)))
    return table


def _pair_lower_indices(dim, bit):
    p = np.arange(dim // 2, dtype=np.int64)
    return ((p >> bit) << (bit + 1)) | (p & ((1 << bit) - 1))


def rabi_oracle(rabi, detuning, duration):
    """Closed-form flip probability of a rectangular pulse."""
    if not rabi > 0:
        raise ValueError("rabi must be positive")
    if duration < 0:
        raise ValueError("duration must be non-negative")
    wg2 = rabi * rabi + detuning * detuning
    return rabi * rabi / wg2 * np.sin(np.pi * np.sqrt(wg2) * duration) ** 2


def apply_pulse(state, geometry, params, pulse):
    """Apply one rectangular rf pulse to the spin under the tip."""
    if state.n_sites != geometry.n_sites:
        raise ValueError("state and geometry disagree on n_sites")
    if pulse.rabi_frequency > pulse.carrier_frequency / 100.0:
        raise ValueError("rabi frequency above carrier/100: rotating-wave approximation invalid")
    site = pulse.tip_during_pulse.site
    bit = _bit(state.n_sites, site, pulse.channel)
    lower = _pair_lower_indices(state.dim, bit)
    res = conditional_resonances(geometry, params, pulse.tip_during_pulse, site, pulse.channel, lower)
    detuning = np.ascontiguousarray(pulse.carrier_frequency - res)
    amps = state.amplitudes.copy()
    _backend.rotate_pairs(amps, bit, detuning, float(pulse.rabi_frequency), float(pulse.phase),
                          float(pulse.duration))
    return ChainState(state.n_sites, amps)


def run_schedule(state, geometry, params, schedule, tip=None):
    """Replay ``schedule`` (tip moves and pulses) starting from ``state``."""
    tip = TipPosition.parked() if tip is None else tip
    for event in schedule.events:
        if isinstance(event, TipPosition):
            tip = event.validate(geometry)
            continue
        if event.tip_during_pulse != tip:
            raise ValueError("pulse tip position does not match the last tip move")
        state = apply_pulse(state, geometry, params, event)
    return state


def basis_probabilities(state, cutoff=1e-14):
    """Map basis label to probability, dropping entries at or below ``cutoff``."""
    probs = np.abs(state.amplitudes) ** 2
    return {state.label(i): float(probs[i]) for i in np.flatnonzero(probs > cutoff)}


def nuclear_marginals(state, sites):
    """Probabilities of the nuclear configurations of ``sites``.

    Entry ``j`` has the bits of ``j`` (most significant first) as the
    nuclear states of ``sites`` in the given order; electrons and other
    nuclei are summed over.
    """
    n = state.n_sites
    probs = np.abs(state.amplitudes) ** 2
    idx = np.arange(state.dim, dtype=np.int64)
    key = np.zeros(state.dim, dtype=np.int64)
    for s in sites:
        key = (key << 1) | ((idx >> _bit(n, s, NUCLEAR)) & 1)
    return np.bincount(key, weights=probs, minlength=2 ** len(sites))


def truth_table(geometry, params, schedule, qubit_sites):
    """Run ``schedule`` on every nuclear basis input of ``qubit_sites``.

    Inputs have all electrons up and all other nuclei ground. Row ``i`` is
    the output distribution over the qubits for input ``i`` (same bit
    order as :func:`nuclear_marginals`).
    """
    n = geometry.n_sites
    k = len(qubit_sites)
    rows = []
    for i in range(2**k):
        nuclei = [Spin.UP] * n
        for pos, s in enumerate(qubit_sites):
            nuclei[s] = Spin((i >> (k - 1 - pos)) & 1)
        psi = ChainState.basis((Spin.UP,) * n, tuple(nuclei))
        out = run_schedule(psi, geometry, params, schedule)
        rows.append(nuclear_marginals(out, qubit_sites))
    return np.array(rows)


def gate_fidelity(observed_truth_table, ideal_permutation):
    """Worst-row probability of the ideal output: ``min_i P(ideal[i] | i)``."""
    table = np.asarray(observed_truth_table, dtype=float)
    ideal = np.asarray(ideal_permutation, dtype=int)
    if table.ndim != 2 or table.shape[0] != ideal.shape[0] or table.shape[1] != table.shape[0]:
        raise ValueError("truth table and permutation shapes do not match")
    return float(np.clip(table[np.arange(len(ideal)), ideal].min(), 0.0, 1.0))


INVERSE_CN = (1, 0, 2, 3)
STANDARD_CN = (0, 1, 3, 2)
