"""Magnetic fields at the donor sites: tip field and electron dipolar fields.

Geometry: donors sit on a line at the sample surface, ``spacing_a`` apart.
The ferromagnetic tip is a uniformly z-magnetized sphere whose center sits
``tip_center_height_d`` above the selected donor. B0 and all moments point
along z, perpendicular to the chain, so for two electrons on the chain the
dipolar angular factor ``3 cos^2(theta) - 1`` is exactly -1.

Dipolar shifts are reported as the terms that are *subtracted* from the
Zeeman frequency, ``f = -gamma * B_dip``. With all electrons up (moments
along +z) every shift is positive.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import _backend
from .spinmodel import Spin, _as_spin


@dataclass(frozen=True)
class MachineGeometry:
    """Chain layout and operating point. Lengths in meters, fields in tesla."""

    n_sites: int = 3
    spacing_a: float = 5e-9
    tip_radius: float = 5e-9
    tip_center_height_d: float = 15e-9
    tip_magnetization_mu0M: float = 2.2
    external_field_B0: float = 10.0
    temperature: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError("n_sites must be a positive integer")
        for name in ("spacing_a", "tip_radius", "tip_center_height_d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.tip_center_height_d > self.tip_radius:
            raise ValueError("tip_center_height_d must exceed tip_radius")
        if self.tip_magnetization_mu0M < 0 or self.external_field_B0 < 0:
            raise ValueError("fields must be non-negative")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    def check_site(self, site):
        if not (isinstance(site, (int, np.integer)) and 0 <= site < self.n_sites):
            raise IndexError(f"site {site!r} out of range for {self.n_sites}-site chain")
        return int(site)


@dataclass(frozen=True)
class TipPosition:
    """Tip above ``site``, or parked (``site is None``, zero field everywhere).

    ``vibrating`` only matters to readout; fields use the rest position.
    """

    site: int = None
    vibrating: bool = False

    @classmethod
    def parked(cls):
        return cls(None)

    @classmethod
    def at(cls, site, vibrating=False):
        return cls(int(site), vibrating)

    @property
    def is_parked(self):
        return self.site is None

    def validate(self, geometry):
        if self.site is not None:
            geometry.check_site(self.site)
        return self


PARKED = TipPosition.parked()


def all_up(n_sites):
    return (Spin.UP,) * n_sites


def electron_signs(config):
    """+1 for a moment along +z (``UP``), -1 for ``DOWN``."""
    return np.array([1.0 if _as_spin(s) is Spin.UP else -1.0 for s in config])


def _check_config(geometry, config):
    if len(config) != geometry.n_sites:
        raise ValueError(f"electron config has {len(config)} entries, chain has {geometry.n_sites}")


def tip_field_z(geometry, tip, site):
    """z-field of the tip sphere at ``site``.

    Outside a uniformly magnetized sphere the field is exactly that of a
    point dipole ``m = M (4/3) pi R^3`` at its center, which gives
    ``B_z = (mu0 M R^3 / 3) (3 cos^2 theta - 1) / r^3``.
    """
    site = geometry.check_site(site)
    tip.validate(geometry)
    if tip.is_parked:
        return 0.0
    x = (site - tip.site) * geometry.spacing_a
    d = geometry.tip_center_height_d
    r2 = x * x + d * d
    cos2 = d * d / r2
    strength = geometry.tip_magnetization_mu0M * geometry.tip_radius**3 / 3.0
    return strength * (3.0 * cos2 - 1.0) / r2**1.5


def tip_esr_shift(geometry, params, tip, site):
    return params.gamma_e * tip_field_z(geometry, tip, site)


def tip_nmr_shift(geometry, params, tip, site):
    return params.gamma_n_eff * tip_field_z(geometry, tip, site)


def pair_field(geometry, params):
    """Field at one site from a single up electron one spacing away (negative)."""
    c = params.constants
    return -c.vacuum_permeability_over_4pi * params.electron_moment / geometry.spacing_a**3


def neighbor_dipole_field(geometry, params, config, site):
    """Signed z-field from the nearest-neighbor electrons only."""
    site = geometry.check_site(site)
    _check_config(geometry, config)
    signs = electron_signs(config)
    b1 = pair_field(geometry, params)
    total = 0.0
    for k in (site - 1, site + 1):
        if 0 <= k < geometry.n_sites:
            total += b1 * signs[k]
    return float(total)


def rest_of_chain_dipole_field(geometry, params, config, site):
    """Signed z-field from every electron at two or more spacings away."""
    site = geometry.check_site(site)
    _check_config(geometry, config)
    signs = electron_signs(config)
    dist = np.abs(np.arange(geometry.n_sites) - site)
    far = dist >= 2
    if not far.any():
        return 0.0
    return float(pair_field(geometry, params) * np.sum(signs[far] / dist[far].astype(float) ** 3))


def chain_dipole_fields(geometry, params, config):
    """Total electron dipolar field at every site (all pairs, compiled kernel)."""
    _check_config(geometry, config)
    return _backend.dipole_fields(electron_signs(config), pair_field(geometry, params))


DipolarShifts = namedtuple("DipolarShifts", ["f_ed", "f_ed_prime", "f_nd", "f_nd_prime"])


def dipolar_shifts(geometry, params, config, site):
    """ESR and NMR dipolar shifts at ``site``: nearest neighbors and the rest."""
    b_nb = neighbor_dipole_field(geometry, params, config, site)
    b_rest = rest_of_chain_dipole_field(geometry, params, config, site)
    return DipolarShifts(
        f_ed=float(-params.gamma_e * b_nb) + 0.0,
        f_ed_prime=float(-params.gamma_e * b_rest) + 0.0,
        f_nd=float(-params.gamma_n_eff * b_nb) + 0.0,
        f_nd_prime=float(-params.gamma_n_eff * b_rest) + 0.0,
    )


def local_field(geometry, params, tip, config, site):
    """B0 + tip + all electron dipolar fields at ``site``."""
    return (geometry.external_field_B0 + tip_field_z(geometry, tip, site)
            + neighbor_dipole_field(geometry, params, config, site)
            + rest_of_chain_dipole_field(geometry, params, config, site))
