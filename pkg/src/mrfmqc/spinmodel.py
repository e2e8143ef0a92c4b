"""Single-donor spin model for 125Te+ (A-center) in 28Si.

One donor carries an electron spin S = 1/2 coupled to a nuclear spin
I = 1/2 by an isotropic hyperfine interaction,

    H = g_e mu_B B S_z + h gamma_n B I_z - A S.I

All energies are reported as frequencies (E / h, in Hz) with a traceless
zero point, so only gaps carry physical meaning.

Conventions
-----------
Both 125Te+ moments are negative, so the magnetic moment points along +z
when the spin projection is m = -1/2. That level is the Zeeman ground
state. Throughout the package the ground level is called ``UP`` (moment
along +z, "polarized in the positive z-direction") and is stored as bit 0;
the excited level is ``DOWN`` (bit 1). With positive effective
gyromagnetic ratios this reproduces the pulse frequencies

    ESR, nuclear ground:   f_e + f_hf
    NMR, electron ground:  f_n + f_hf

with f_hf = A / 2h.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy import constants as _sc


class Spin(IntEnum):
    """Two-level label. ``UP`` is the ground (lower-energy) level."""

    UP = 0
    DOWN = 1

    @property
    def m(self):
        """Spin projection quantum number (-1/2 for the ground level)."""
        return -0.5 if self is Spin.UP else 0.5

    @property
    def flipped(self):
        return Spin.DOWN if self is Spin.UP else Spin.UP


def _as_spin(value):
    if isinstance(value, Spin):
        return value
    if isinstance(value, str):
        key = value.strip().lower()
        if key in ("up", "ground", "g", "u", "0"):
            return Spin.UP
        if key in ("down", "excited", "e", "d", "1"):
            return Spin.DOWN
        raise ValueError(f"unknown spin state {value!r}")
    return Spin(int(value))


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants in SI units (taken from :mod:`scipy.constants`)."""

    bohr_magneton: float = _sc.physical_constants["Bohr magneton"][0]
    nuclear_magneton: float = _sc.physical_constants["nuclear magneton"][0]
    planck_h: float = _sc.h
    boltzmann_k: float = _sc.k
    vacuum_permeability_over_4pi: float = _sc.mu_0 / (4.0 * np.pi)

    def __post_init__(self):
        for name in ("bohr_magneton", "nuclear_magneton", "planck_h", "boltzmann_k",
                     "vacuum_permeability_over_4pi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


CODATA = PhysicalConstants()

# Donor ground-state energies of Te in Si, kept for reference only.
A_CENTER_GROUND_STATE_MEV = 410.8
B_CENTER_GROUND_STATE_MEV = 198.8


def gamma_n_from_moment(g_n, constants=CODATA):
    """NMR frequency per tesla for an I = 1/2 nucleus of moment ``g_n`` mu_N.

    The quoted 125Te value g_n = 0.882 is a moment in nuclear magnetons,
    so the transition frequency is 2 g_n mu_N B / h (13.45 MHz/T).
    """
    return 2.0 * g_n * constants.nuclear_magneton / constants.planck_h


@dataclass(frozen=True)
class DonorParams:
    """Spin parameters of a 125Te+ donor.

    Parameters
    ----------
    g_e : float
        Electron g-factor.
    gamma_n_eff : float
        Nuclear transition frequency per tesla, Hz/T. Stored directly
        (13.45 MHz/T gives the 134.5 MHz NMR line at 10 T).
    hyperfine_A_over_h : float
        Isotropic hyperfine constant A/h in Hz.
    """

    g_e: float = 2.0
    gamma_n_eff: float = 13.45e6
    hyperfine_A_over_h: float = 3.5e9
    constants: PhysicalConstants = field(default=CODATA, repr=False)

    def __post_init__(self):
        if not self.g_e > 0:
            raise ValueError("g_e must be positive")
        if not self.gamma_n_eff > 0:
            raise ValueError("gamma_n_eff must be positive")
        if not self.hyperfine_A_over_h > 0:
            raise ValueError("hyperfine_A_over_h must be positive")

    @property
    def gamma_e(self):
        """Electron resonance frequency per tesla, ``g_e mu_B / h`` (Hz/T)."""
        return self.g_e * self.constants.bohr_magneton / self.constants.planck_h

    @property
    def f_hf(self):
        """Hyperfine shift of either resonance line, A / 2h."""
        return self.hyperfine_A_over_h / 2.0

    @property
    def electron_moment(self):
        """|m_z| of the donor electron, g_e mu_B / 2 (J/T)."""
        return self.g_e * self.constants.bohr_magneton / 2.0


@dataclass(frozen=True)
class SiteLevels:
    """Four donor levels as frequencies, keyed by (electron, nuclear) label.

    ``basis_mixing`` holds ``(cos a, sin a)`` of the m_F = 0 doublet mixing
    angle; it is ``(1.0, 0.0)`` for the secular solution.
    """

    energies: dict
    basis_mixing: tuple = (1.0, 0.0)

    def __getitem__(self, key):
        e, n = key
        return self.energies[(_as_spin(e), _as_spin(n))]

    def esr(self, nuclear_state):
        n = _as_spin(nuclear_state)
        return abs(self[(Spin.DOWN, n)] - self[(Spin.UP, n)])

    def nmr(self, electron_state):
        e = _as_spin(electron_state)
        return abs(self[(e, Spin.DOWN)] - self[(e, Spin.UP)])


def _check_field(local_field):
    if local_field < 0:
        raise ValueError("local_field must be non-negative")


def secular_levels(params, local_field):
    """Diagonal (secular) levels ``γ_e B m_s + γ_n B m_i - (A/h) m_s m_i``."""
    _check_field(local_field)
    ge = params.gamma_e * local_field
    gn = params.gamma_n_eff * local_field
    a = params.hyperfine_A_over_h
    energies = {}
    for e in Spin:
        for n in Spin:
            energies[(e, n)] = ge * e.m + gn * n.m - a * e.m * n.m
    return SiteLevels(energies=energies)


_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_ID = np.eye(2, dtype=complex)


def hamiltonian_matrix(params, local_field):
    """Full 4x4 Hamiltonian in Hz, basis ``|m_s, m_i>`` with m = +1/2 first."""
    ge = params.gamma_e * local_field
    gn = params.gamma_n_eff * local_field
    a = params.hyperfine_A_over_h
    s_dot_i = sum(np.kron(op, op) for op in (_SX, _SY, _SZ))
    return ge * np.kron(_SZ, _ID) + gn * np.kron(_ID, _SZ) - a * s_dot_i


def exact_eigensystem(params, local_field):
    """Eigenvalues (ascending) and unitary eigenvectors of the 4x4 Hamiltonian."""
    _check_field(local_field)
    return np.linalg.eigh(hamiltonian_matrix(params, local_field))


def exact_levels(params, local_field):
    """Eigenvalues of the full Hamiltonian, including flip-flop terms.

    ``-A (S+ I- + S- I+) / 2`` couples only ``|+1/2,-1/2>`` and
    ``|-1/2,+1/2>``; the stretched states stay exact eigenstates. The mixed
    doublet is labelled adiabatically (upper level = electron excited).
    """
    _check_field(local_field)
    h = hamiltonian_matrix(params, local_field)
    vals, vecs = np.linalg.eigh(h[1:3, 1:3])
    energies = {
        (Spin.DOWN, Spin.DOWN): h[0, 0].real,
        (Spin.UP, Spin.UP): h[3, 3].real,
        (Spin.UP, Spin.DOWN): vals[0],
        (Spin.DOWN, Spin.UP): vals[1],
    }
    upper = vecs[:, 1]
    return SiteLevels(energies=energies, basis_mixing=(abs(upper[0]), abs(upper[1])))


def second_order_shift(params, local_field):
    """Perturbative shift of the mixed doublet, ``(A/2h)^2 / ((γ_e - γ_n) B)``."""
    return params.f_hf**2 / ((params.gamma_e - params.gamma_n_eff) * local_field)


def esr_frequency(params, local_field, nuclear_state):
    """Secular electron resonance for the given nuclear state (no tip term)."""
    _check_field(local_field)
    n = _as_spin(nuclear_state)
    return abs(params.gamma_e * local_field - params.hyperfine_A_over_h * n.m)


def nmr_frequency(params, local_field, electron_state):
    """Secular nuclear resonance; electron ``UP`` gives ``f_n + f_hf``."""
    _check_field(local_field)
    e = _as_spin(electron_state)
    return abs(params.gamma_n_eff * local_field - params.hyperfine_A_over_h * e.m)


def _check_temperature(temperature):
    if not temperature > 0:
        raise ValueError("temperature must be positive")


def electron_flip_probability(params, field, temperature):
    """Bare Boltzmann factor ``exp(-g_e mu_B B / k T)`` for an electron flip.

    Returned unnormalized; at operating conditions it is ~1e-6 and the
    normalized population differs only at that order.
    """
    _check_temperature(temperature)
    if field < 0:
        raise ValueError("field must be non-negative")
    c = params.constants
    return float(np.exp(-params.g_e * c.bohr_magneton * field / (c.boltzmann_k * temperature)))


def nuclear_excited_fraction(params, field, temperature):
    """Normalized excited population of the nuclear spin, electron ground.

    Two-level Boltzmann statistics at the NMR frequency ``f_n + f_hf``.
    """
    _check_temperature(temperature)
    c = params.constants
    f = nmr_frequency(params, field, Spin.UP)
    x = np.exp(-c.planck_h * f / (c.boltzmann_k * temperature))
    return float(x / (1.0 + x))


@dataclass(frozen=True)
class ThermalDistribution:
    """Thermal product distribution over nuclear configurations.

    ``configs`` lists every nuclear configuration (tuple of :class:`Spin`)
    with electrons pinned up together with its absolute weight;
    ``electron_flip_weight`` lumps every configuration with at least one
    flipped electron. All weights sum to one.
    """

    configs: tuple
    electron_flip_weight: float
    nuclear_excited_probability: float

    @property
    def total_weight(self):
        return sum(w for _, w in self.configs) + self.electron_flip_weight

    def conditional(self, nuclear_config):
        """Weight of ``nuclear_config`` given that all electrons are up."""
        target = tuple(_as_spin(s) for s in nuclear_config)
        norm = 1.0 - self.electron_flip_weight
        for cfg, w in self.configs:
            if cfg == target:
                return w / norm
        raise KeyError(nuclear_config)

    def sample(self, rng):
        """Draw a nuclear configuration with electrons up (flips ignored)."""
        p = self.nuclear_excited_probability
        n = len(self.configs[0][0])
        return tuple(Spin.DOWN if x else Spin.UP for x in rng.random(n) < p)


def thermal_chain_distribution(geometry, params):
    """Enumerate the 2^N nuclear configurations at the geometry's B0 and T."""
    n = geometry.n_sites
    b0, t = geometry.external_field_B0, geometry.temperature
    q = electron_flip_probability(params, b0, t)
    p = nuclear_excited_fraction(params, b0, t)
    electrons_up = (1.0 - q) ** n
    configs = []
    for index in range(2**n):
        bits = tuple(Spin((index >> (n - 1 - k)) & 1) for k in range(n))
        k_exc = sum(int(b) for b in bits)
        configs.append((bits, electrons_up * p**k_exc * (1.0 - p) ** (n - k_exc)))
    return ThermalDistribution(configs=tuple(configs), electron_flip_weight=1.0 - electrons_up,
                               nuclear_excited_probability=p)
