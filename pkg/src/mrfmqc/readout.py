"""MRFM single-spin readout, reduced to a threshold detector.

A vibrating tip over a site drives that site's ESR line at the nuclear-
ground frequency. The electron (and hence the cantilever) responds only if
the nucleus is ground, so detection of a cantilever signal projects the
nucleus onto its ground state. Cantilever mechanics are not modelled:

    amplitude = signal_gain * [nucleus found ground] + N(0, noise_rms)
    detected  = amplitude > threshold

The nucleus is collapsed with Born-rule probabilities, then the site's
electron is returned to up.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dynamics import ELECTRON, NUCLEAR, ChainState, _bit, run_schedule
from .fields import TipPosition, all_up
from .planner import electron_pulse_frequency, frequency_budget, plan_initialization


@dataclass(frozen=True)
class DetectionModel:
    signal_gain: float = 1.0
    noise_rms: float = 0.0
    threshold: float = 0.5

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.noise_rms < 0:
            raise ValueError("noise_rms must be non-negative")

    def probe_frequency(self, geometry, params, site):
        """Carrier of the probing ESR drive, tip over ``site``."""
        tip = TipPosition.at(site, vibrating=True)
        return electron_pulse_frequency(frequency_budget(geometry, params, tip, all_up(geometry.n_sites), site))


@dataclass(frozen=True)
class MeasurementRecord:
    site: int
    detected: bool
    signal_amplitude: float
    ground_truth_probability: float

    def to_row(self):
        return (self.site, int(self.detected), self.signal_amplitude, self.ground_truth_probability)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _bit_mask(state, site, kind):
    return (np.arange(state.dim) >> _bit(state.n_sites, site, kind)) & 1


def _project(amps, mask, value):
    out = np.where(mask == value, amps, 0.0)
    norm = np.linalg.norm(out)
    return out / norm


def _reset_electron(amps, n_sites, site, rng):
    bit = _bit(n_sites, site, ELECTRON)
    mask = (np.arange(amps.shape[0]) >> bit) & 1
    p_down = float(np.sum(np.abs(amps[mask == 1]) ** 2))
    if p_down <= 0.0:
        return amps
    if rng.random() < p_down:
        amps = _project(amps, mask, 1)
        idx = np.arange(amps.shape[0])
        return amps[idx ^ (1 << bit)]
    return _project(amps, mask, 0)


def probe_site(state, geometry, params, model, site, seed=0):
    """Measure the nuclear spin at ``site``; returns ``(record, post_state)``."""
    site = geometry.check_site(site)
    rng = _rng(seed)
    amps = state.amplitudes
    mask = _bit_mask(state, site, NUCLEAR)
    p_ground = float(np.clip(np.sum(np.abs(amps[mask == 0]) ** 2), 0.0, 1.0))
    ground = bool(rng.random() < p_ground) if 0.0 < p_ground < 1.0 else p_ground >= 0.5
    post = _project(amps, mask, 0 if ground else 1)
    post = _reset_electron(post, state.n_sites, site, rng)
    amplitude = model.signal_gain * (1.0 if ground else 0.0)
    if model.noise_rms > 0:
        amplitude += rng.normal(0.0, model.noise_rms)
    record = MeasurementRecord(site, bool(amplitude > model.threshold), float(amplitude), p_ground)
    return record, ChainState(state.n_sites, post)


def electrons_polarized(state, tol=1e-9):
    """True if the population with any electron down is at most ``tol``."""
    mask = np.zeros(state.dim, dtype=bool)
    idx = np.arange(state.dim)
    for s in range(state.n_sites):
        mask |= ((idx >> _bit(state.n_sites, s, ELECTRON)) & 1).astype(bool)
    return float(np.sum(np.abs(state.amplitudes[mask]) ** 2)) <= tol


def initialize_chain(state, geometry, params, model, seed=0, max_rounds=20):
    """Probe every site and pi-pulse the undetected ones until all are detected.

    Returns the final state and every probe record in the order taken. The
    number of correction pulses is the number of records with
    ``detected == False``.
    """
    if not electrons_polarized(state):
        raise ValueError("initialization requires every electron spin up")
    rng = _rng(seed)
    records = []
    pending = list(range(geometry.n_sites))
    for _ in range(max_rounds):
        excited = []
        for site in pending:
            record, state = probe_site(state, geometry, params, model, site, rng)
            records.append(record)
            if not record.detected:
                excited.append(site)
        if not excited:
            break
        state = run_schedule(state, geometry, params, plan_initialization(geometry, params, excited))
        pending = excited
    return state, records


def final_measurement(state, geometry, params, model, seed=0):
    """Probe every site in index order; returns the records."""
    rng = _rng(seed)
    records = []
    for site in range(geometry.n_sites):
        record, state = probe_site(state, geometry, params, model, site, rng)
        records.append(record)
    return records


def sample_patterns(state, geometry, params, model, shots, seed=0, sites=None):
    """Histogram of detection patterns over ``shots`` independent readouts.

    Keys are strings of ``g`` (detected, nucleus ground) and ``e`` per site
    in ``sites`` (default: all).
    """
    rng = _rng(seed)
    sites = range(geometry.n_sites) if sites is None else sites
    counts = Counter()
    for _ in range(shots):
        records = final_measurement(state, geometry, params, model, rng)
        counts["".join("g" if records[s].detected else "e" for s in sites)] += 1
    return counts
