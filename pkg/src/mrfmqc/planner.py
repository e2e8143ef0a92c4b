"""Pulse frequencies and protocol schedules for the donor-chain computer.

The three pulse frequencies used by every protocol:

    electron (tip on site):        f_e + f_hf + df_e
    nuclear pi (all electrons up): f_n + f_hf + df_n - f_nd - f'_nd
    CN target:                     f_n + f_hf + df_n - f'_nd

The electron line is resonant only when the on-site nucleus is ground. The
CN target line is resonant only when the two neighbor electrons cancel,
i.e. when one of them (the control's) has been flipped.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import ELECTRON, NUCLEAR, basis_index, conditional_resonances, _bit
from .fields import (
    TipPosition,
    all_up,
    dipolar_shifts,
    tip_esr_shift,
    tip_nmr_shift,
)
from .spinmodel import Spin, _as_spin

SELECTIVITY_MARGIN = 10.0


@dataclass(frozen=True)
class PulseSpec:
    """Rectangular rf pulse on the spin under the tip.

    ``rabi_frequency`` is defined so a resonant pulse of duration
    ``1 / (2 rabi)`` is a pi-pulse.
    """

    carrier_frequency: float
    rabi_frequency: float
    phase: float
    duration: float
    tip_during_pulse: TipPosition
    channel: str = NUCLEAR

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")
        if not self.rabi_frequency > 0:
            raise ValueError("rabi_frequency must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.tip_during_pulse.is_parked:
            raise ValueError("a pulse addresses the spin under the tip; tip cannot be parked")
        if self.channel not in (ELECTRON, NUCLEAR):
            raise ValueError(f"unknown channel {self.channel!r}")

    @property
    def site(self):
        return self.tip_during_pulse.site

    @property
    def rotation_angle(self):
        return 2.0 * math.pi * self.rabi_frequency * self.duration


def pi_pulse(carrier, rabi, tip, channel, phase=0.0):
    return PulseSpec(carrier, rabi, phase, 1.0 / (2.0 * rabi), tip, channel)


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered tip moves (:class:`TipPosition`) and pulses (:class:`PulseSpec`)."""

    events: tuple = ()
    protocol: str = ""
    sites: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "sites", tuple(self.sites))
        tip = None
        for event in self.events:
            if isinstance(event, TipPosition):
                tip = event
            elif isinstance(event, PulseSpec):
                if event.tip_during_pulse != tip:
                    raise ValueError("pulse tip position must equal the most recent tip move")
            else:
                raise TypeError(f"unexpected schedule event {event!r}")

    @property
    def pulses(self):
        return [e for e in self.events if isinstance(e, PulseSpec)]

    def __add__(self, other):
        return PulseSchedule(self.events + other.events, f"{self.protocol}+{other.protocol}",
                             self.sites + other.sites)


def _num(x):
    return format(float(x), ".17g")


def serialize_schedule(schedule):
    """One event per line: ``MOVE site`` or ``PULSE carrier rabi phase duration``."""
    lines = []
    for event in schedule.events:
        if isinstance(event, TipPosition):
            if event.is_parked:
                lines.append("MOVE parked")
            else:
                lines.append(f"MOVE {event.site}")
        else:
            lines.append(" ".join(["PULSE", _num(event.carrier_frequency), _num(event.rabi_frequency),
                                   _num(event.phase), _num(event.duration)]))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_schedule(text, geometry, params, protocol=""):
    """Inverse of :func:`serialize_schedule`.

    The channel of each pulse is not stored; it is recovered as whichever
    of the site's ESR or NMR lines (all spins ground) is closer to the
    carrier.
    """
    events = []
    tip = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "MOVE" and len(parts) == 2:
            tip = TipPosition.parked() if parts[1] == "parked" else TipPosition.at(int(parts[1]))
            tip.validate(geometry)
            events.append(tip)
        elif parts[0] == "PULSE" and len(parts) == 5:
            if tip is None or tip.is_parked:
                raise ValueError(f"line {lineno}: pulse without the tip at a site")
            carrier, rabi, phase, duration = (float(p) for p in parts[1:])
            ground = basis_index(all_up(geometry.n_sites), all_up(geometry.n_sites))
            f_e = conditional_resonances(geometry, params, tip, tip.site, ELECTRON, [ground])[0]
            f_n = conditional_resonances(geometry, params, tip, tip.site, NUCLEAR, [ground])[0]
            channel = ELECTRON if abs(carrier - f_e) < abs(carrier - f_n) else NUCLEAR
            events.append(PulseSpec(carrier, rabi, phase, duration, tip, channel))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    return PulseSchedule(tuple(events), protocol)


@dataclass(frozen=True)
class FrequencyBudget:
    """Every frequency term entering the three pulse frequencies, in Hz."""

    f_e: float
    f_n: float
    f_hf: float
    delta_f_e: float
    delta_f_n: float
    f_ed: float
    f_ed_prime: float
    f_nd: float
    f_nd_prime: float
    site: int = 0
    tip: TipPosition = field(default_factory=TipPosition.parked)
    config: tuple = ()

    TERMS = ("f_e", "f_n", "f_hf", "delta_f_e", "delta_f_n", "f_ed", "f_ed_prime", "f_nd", "f_nd_prime")

    def as_dict(self):
        return {name: getattr(self, name) for name in self.TERMS}


def frequency_budget(geometry, params, tip, config, site):
    site = geometry.check_site(site)
    config = tuple(_as_spin(s) for s in config)
    b0 = geometry.external_field_B0
    shifts = dipolar_shifts(geometry, params, config, site)
    return FrequencyBudget(
        f_e=params.gamma_e * b0,
        f_n=params.gamma_n_eff * b0,
        f_hf=params.f_hf,
        delta_f_e=tip_esr_shift(geometry, params, tip, site),
        delta_f_n=tip_nmr_shift(geometry, params, tip, site),
        f_ed=shifts.f_ed,
        f_ed_prime=shifts.f_ed_prime,
        f_nd=shifts.f_nd,
        f_nd_prime=shifts.f_nd_prime,
        site=site,
        tip=tip,
        config=config,
    )


def electron_pulse_frequency(budget):
    """ESR line of the site under the tip, nuclear ground; dipolar terms ignored."""
    return budget.f_e + budget.f_hf + budget.delta_f_e


def nuclear_pi_pulse_frequency(budget):
    return budget.f_n + budget.f_hf + budget.delta_f_n - budget.f_nd - budget.f_nd_prime


def cn_target_pulse_frequency(budget):
    """Resonant only when the nearest-neighbor dipolar fields cancel."""
    return budget.f_n + budget.f_hf + budget.delta_f_n - budget.f_nd_prime


def calibrated_cn_rabi(f_nd, k=1):
    """Rabi frequency that makes a pi-pulse a full rotation ``k`` times at detuning ``f_nd``.

    At ``Ω = f_nd / sqrt(4k² - 1)`` the generalized Rabi frequency is
    ``2kΩ``, so the detuned branch completes exactly ``k`` cycles during
    ``1 / (2Ω)`` and is left unflipped.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if not f_nd > 0:
        raise ValueError("f_nd must be positive")
    return f_nd / math.sqrt(4 * k * k - 1)


def selective_rabi(detuning, margin=SELECTIVITY_MARGIN, max_rabi=math.inf):
    """Largest commensurate Rabi frequency at least ``margin`` below ``detuning``.

    Uses the smallest ``k`` with ``sqrt(4k² - 1) >= margin`` that also
    keeps the result under ``max_rabi``, so a pi-pulse leaves the
    transition at ``detuning`` exactly unflipped.
    """
    detuning = abs(detuning)
    k = max(1, math.ceil(math.sqrt((margin * margin + 1) / 4)))
    while math.sqrt(4 * k * k - 1) < margin or calibrated_cn_rabi(detuning, k) > max_rabi:
        k += 1
    return calibrated_cn_rabi(detuning, k)


def _ground_index(n, electrons=None):
    electrons = all_up(n) if electrons is None else electrons
    return basis_index(electrons, all_up(n))


def _nearest_detuning(geometry, params, tip, site, kind, carrier, electrons=None):
    """Smallest |carrier - f| over the transitions a pulse must not touch.

    Covers every other (site, kind) transition with its partner spin in
    either state, and the addressed transition with its partner flipped.
    Nearest-neighbor-only branches of the addressed spin are excluded.
    """
    n = geometry.n_sites
    base = _ground_index(n, electrons)
    best = math.inf
    for s in range(n):
        for k in (ELECTRON, NUCLEAR):
            partner = NUCLEAR if k == ELECTRON else ELECTRON
            flipped = base ^ (1 << _bit(n, s, partner))
            idx = [flipped] if (s, k) == (site, kind) else [base, flipped]
            f = conditional_resonances(geometry, params, tip, s, k, idx)
            best = min(best, float(np.min(np.abs(carrier - f))))
    return best


def _electron_pulse(geometry, params, site, rabi=None):
    tip = TipPosition.at(site)
    budget = frequency_budget(geometry, params, tip, all_up(geometry.n_sites), site)
    carrier = electron_pulse_frequency(budget)
    if rabi is None:
        rabi = selective_rabi(_nearest_detuning(geometry, params, tip, site, ELECTRON, carrier),
                              max_rabi=carrier / 1000.0)
    return pi_pulse(carrier, rabi, tip, ELECTRON)


def default_nuclear_rabi(geometry, params, site, carrier):
    tip = TipPosition.at(site)
    return selective_rabi(_nearest_detuning(geometry, params, tip, site, NUCLEAR, carrier),
                          max_rabi=carrier / 1000.0)


def plan_one_qubit_rotation(geometry, params, site, angle, phase=0.0, rabi=None):
    """Rotate the nuclear qubit at ``site`` by ``angle`` about an equatorial axis."""
    site = geometry.check_site(site)
    if not angle > 0:
        raise ValueError("angle must be positive")
    tip = TipPosition.at(site)
    budget = frequency_budget(geometry, params, tip, all_up(geometry.n_sites), site)
    carrier = nuclear_pi_pulse_frequency(budget)
    if rabi is None:
        rabi = default_nuclear_rabi(geometry, params, site, carrier)
    elif rabi <= abs(budget.f_nd):
        raise ValueError("one-qubit rotation needs a Rabi frequency above f_nd")
    pulse = PulseSpec(carrier, rabi, phase, angle / (2.0 * math.pi * rabi), tip, NUCLEAR)
    return PulseSchedule((tip, pulse), "rotation", (site,))


def _check_cn_pair(geometry, control_site, target_site):
    control_site = geometry.check_site(control_site)
    target_site = geometry.check_site(target_site)
    if abs(control_site - target_site) != 1:
        raise ValueError("CN control and target must be nearest neighbors")
    if not 0 < target_site < geometry.n_sites - 1:
        raise ValueError("CN target must be an interior site with two neighbors")
    return control_site, target_site


def _plan_cn(geometry, params, control_site, target_site, conditional, rabi, electron_rabi, name):
    control_site, target_site = _check_cn_pair(geometry, control_site, target_site)
    n = geometry.n_sites
    e_pulse = _electron_pulse(geometry, params, control_site, electron_rabi)
    tip_t = TipPosition.at(target_site)
    up = frequency_budget(geometry, params, tip_t, all_up(n), target_site)
    if conditional:
        flipped = list(all_up(n))
        flipped[control_site] = Spin.DOWN
        carrier = cn_target_pulse_frequency(frequency_budget(geometry, params, tip_t, flipped, target_site))
    else:
        carrier = nuclear_pi_pulse_frequency(up)
    if rabi is None:
        rabi = calibrated_cn_rabi(up.f_nd, 1)
    events = (
        e_pulse.tip_during_pulse, e_pulse,
        tip_t, pi_pulse(carrier, rabi, tip_t, NUCLEAR),
        e_pulse.tip_during_pulse, e_pulse,
    )
    return PulseSchedule(events, name, (control_site, target_site))


def plan_inverse_cn(geometry, params, control_site, target_site, rabi=None, electron_rabi=None):
    """Target flips iff the control nucleus is ground."""
    return _plan_cn(geometry, params, control_site, target_site, True, rabi, electron_rabi, "inverse-cn")


def plan_standard_cn(geometry, params, control_site, target_site, rabi=None, electron_rabi=None):
    """Target flips iff the control nucleus is excited."""
    return _plan_cn(geometry, params, control_site, target_site, False, rabi, electron_rabi, "standard-cn")


def plan_initialization(geometry, params, detected_excited_sites, rabi=None):
    """A nuclear pi-pulse on each listed site, in list order."""
    events = []
    sites = []
    for site in detected_excited_sites:
        site = geometry.check_site(site)
        tip = TipPosition.at(site)
        budget = frequency_budget(geometry, params, tip, all_up(geometry.n_sites), site)
        carrier = nuclear_pi_pulse_frequency(budget)
        r = default_nuclear_rabi(geometry, params, site, carrier) if rabi is None else rabi
        events += [tip, pi_pulse(carrier, r, tip, NUCLEAR)]
        sites.append(site)
    return PulseSchedule(tuple(events), "init", tuple(sites))


@dataclass(frozen=True)
class SelectivityCheck:
    pulse_index: int
    site: int
    channel: str
    rabi: float
    nearest_detuning: float

    @property
    def margin(self):
        return self.nearest_detuning / self.rabi

    @property
    def ok(self):
        return self.margin >= SELECTIVITY_MARGIN


def lint_schedule(schedule, geometry, params):
    """Selectivity margin of every pulse against all non-addressed transitions.

    Evaluated with all electrons up and with each single electron other
    than the addressed site's flipped; the worst case is reported per pulse.
    """
    n = geometry.n_sites
    checks = []
    for i, pulse in enumerate(schedule.pulses):
        electron_configs = [all_up(n)]
        for s in range(n):
            if s != pulse.site:
                cfg = list(all_up(n))
                cfg[s] = Spin.DOWN
                electron_configs.append(tuple(cfg))
        worst = min(
            _nearest_detuning(geometry, params, pulse.tip_during_pulse, pulse.site, pulse.channel,
                              pulse.carrier_frequency, cfg)
            for cfg in electron_configs
        )
        checks.append(SelectivityCheck(i, pulse.site, pulse.channel, pulse.rabi_frequency, worst))
    return checks


def with_rabi(pulse, rabi):
    """Same pulse at a different Rabi frequency, keeping the rotation angle."""
    return replace(pulse, rabi_frequency=rabi, duration=pulse.rotation_angle / (2 * math.pi * rabi))
