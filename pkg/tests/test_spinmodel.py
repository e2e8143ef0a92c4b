import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import physical_constants, h, k

from mrfmqc.fields import MachineGeometry
from mrfmqc.spinmodel import (
    CODATA,
    DonorParams,
    PhysicalConstants,
    Spin,
    electron_flip_probability,
    esr_frequency,
    exact_eigensystem,
    exact_levels,
    gamma_n_from_moment,
    hamiltonian_matrix,
    nmr_frequency,
    nuclear_excited_fraction,
    second_order_shift,
    secular_levels,
    thermal_chain_distribution,
)

MU_B = physical_constants["Bohr magneton"][0]
MU_N = physical_constants["nuclear magneton"][0]


class TestParams:
    def test_constants_positive(self):
        for value in vars(CODATA).values():
            assert value > 0

    def test_negative_constant_rejected(self):
        with pytest.raises(ValueError):
            PhysicalConstants(planck_h=-1.0)

    def test_gamma_e_derived(self, params):
        assert params.gamma_e == pytest.approx(2.0 * MU_B / h, rel=1e-15)
        assert params.gamma_e == pytest.approx(27.99e9, rel=1e-3)

    def test_f_hf_is_half_A(self, params):
        assert params.f_hf == 1.75e9

    def test_gamma_n_from_quoted_moment(self):
        # 0.882 mu_N moment -> 2 * 0.882 * mu_N / h, close to 13.45 MHz/T
        assert gamma_n_from_moment(0.882) == pytest.approx(2 * 0.882 * MU_N / h)
        assert gamma_n_from_moment(0.882) == pytest.approx(13.45e6, rel=5e-4)

    @pytest.mark.parametrize("kw", [{"g_e": 0}, {"gamma_n_eff": -1}, {"hyperfine_A_over_h": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            DonorParams(**kw)


class TestSecular:
    def test_esr_at_10T(self, params):
        lv = secular_levels(params, 10.0)
        assert lv.esr(Spin.UP) == pytest.approx(281.6749e9, rel=1e-6)
        assert lv.esr(Spin.UP) == pytest.approx(281.7e9, rel=1e-3)

    def test_zero_field(self, params):
        lv = secular_levels(params, 0.0)
        assert lv.esr(Spin.UP) == pytest.approx(1.75e9)
        assert lv.esr(Spin.DOWN) == pytest.approx(1.75e9)
        assert lv.nmr(Spin.UP) == pytest.approx(1.75e9)

    def test_nmr_at_10T(self, params):
        assert secular_levels(params, 10.0).nmr(Spin.UP) == pytest.approx(1884.5e6, rel=1e-12)

    def test_energies_traceless(self, params):
        assert sum(secular_levels(params, 7.0).energies.values()) == pytest.approx(0.0, abs=1e-3)

    def test_negative_field_rejected(self, params):
        with pytest.raises(ValueError):
            secular_levels(params, -1.0)


class TestExact:
    def test_hermitian_unitary(self, params):
        hm = hamiltonian_matrix(params, 10.0)
        np.testing.assert_allclose(hm, hm.conj().T, atol=0)
        vals, vecs = exact_eigensystem(params, 10.0)
        assert np.all(np.isreal(vals))
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-12)

    def test_zero_field_singlet_triplet(self, params):
        a = params.hyperfine_A_over_h
        vals = sorted(exact_levels(params, 0.0).energies.values())
        np.testing.assert_allclose(vals, [-a / 4, -a / 4, -a / 4, 3 * a / 4], rtol=1e-12)

    def test_decoupled_limit(self):
        p = DonorParams(hyperfine_A_over_h=1e-300)
        ex = exact_levels(p, 10.0)
        sec = secular_levels(p, 10.0)
        for key in sec.energies:
            assert ex.energies[key] == pytest.approx(sec.energies[key], rel=1e-12)

    def test_traceless(self, params):
        assert sum(exact_levels(params, 10.0).energies.values()) == pytest.approx(0.0, abs=1e-3)

    def test_mixed_doublet_shift_10T(self, params):
        # oracle: closed-form 2x2 eigenvalue of the m=0 block
        x = (params.gamma_e - params.gamma_n_eff) * 10.0 / 2
        closed = math.sqrt(x * x + params.f_hf**2) - x
        ex = exact_levels(params, 10.0)
        sec = secular_levels(params, 10.0)
        key = (Spin.DOWN, Spin.UP)
        assert ex.energies[key] - sec.energies[key] == pytest.approx(closed, rel=1e-6)
        assert closed == pytest.approx(11e6, rel=0.01)

    @pytest.mark.parametrize("b", [1.0, 5.0, 10.0])
    def test_secular_within_second_order_bound(self, params, b):
        bound = second_order_shift(params, b)
        ex, sec = exact_levels(params, b), secular_levels(params, b)
        for state in Spin:
            assert abs(ex.esr(state) - sec.esr(state)) <= bound
            assert abs(ex.nmr(state) - sec.nmr(state)) <= bound


class TestTransitions:
    def test_esr(self, params):
        up = esr_frequency(params, 10.0, "up")
        down = esr_frequency(params, 10.0, "down")
        assert up == pytest.approx(params.gamma_e * 10 + 1.75e9, rel=1e-15)
        assert down == pytest.approx(278.17e9, rel=1e-4)
        assert up - down == pytest.approx(3.5e9, rel=1e-12)

    def test_nmr(self, params):
        assert nmr_frequency(params, 10.0, Spin.UP) == pytest.approx(1884.5e6, rel=1e-12)
        assert nmr_frequency(params, 10.0, Spin.DOWN) == pytest.approx(1615.5e6, rel=1e-12)
        assert nmr_frequency(params, 0.0, Spin.UP) == 1750e6

    @given(st.floats(0.0, 20.0))
    def test_hyperfine_splitting_identity(self, b):
        p = DonorParams()
        # valid while the ESR line stays above the hyperfine splitting
        if p.gamma_e * b > p.f_hf:
            diff = esr_frequency(p, b, Spin.UP) - esr_frequency(p, b, Spin.DOWN)
            assert diff == pytest.approx(p.hyperfine_A_over_h, rel=1e-9)


class TestThermal:
    def test_flip_probability(self, params):
        oracle = math.exp(-2 * MU_B * 10 / (k * 1.0))
        q = electron_flip_probability(params, 10.0, 1.0)
        assert q == pytest.approx(oracle, rel=1e-12)
        assert q == pytest.approx(1.46e-6, rel=0.01)

    def test_flip_limits(self, params):
        assert electron_flip_probability(params, 10.0, 1e12) == pytest.approx(1.0, rel=1e-9)
        assert electron_flip_probability(params, 0.0, 1.0) == 1.0
        with pytest.raises(ValueError):
            electron_flip_probability(params, 10.0, 0.0)

    @settings(max_examples=50)
    @given(st.floats(0.1, 20.0), st.floats(0.1, 20.0), st.floats(0.05, 10.0))
    def test_flip_monotone(self, b1, b2, t):
        p = DonorParams()
        lo, hi = sorted((b1, b2))
        if hi - lo > 1e-6:
            assert electron_flip_probability(p, hi, t) < electron_flip_probability(p, lo, t)
            assert electron_flip_probability(p, lo, t) < electron_flip_probability(p, lo, t * 1.5)

    def test_nuclear_fraction(self, params):
        x = math.exp(-h * 1884.5e6 / k)
        assert nuclear_excited_fraction(params, 10.0, 1.0) == pytest.approx(x / (1 + x), rel=1e-12)
        assert nuclear_excited_fraction(params, 10.0, 1.0) == pytest.approx(0.477, abs=1e-3)

    def test_nuclear_fraction_limits(self, params):
        assert nuclear_excited_fraction(params, 10.0, 1e-4) == pytest.approx(0.0, abs=1e-12)
        assert nuclear_excited_fraction(params, 10.0, 1e12) == pytest.approx(0.5, abs=1e-9)
        with pytest.raises(ValueError):
            nuclear_excited_fraction(params, 10.0, -1.0)

    def test_chain_distribution_single(self, params):
        dist = thermal_chain_distribution(MachineGeometry(n_sites=1), params)
        assert dist.total_weight == pytest.approx(1.0, abs=1e-12)
        assert dist.conditional([Spin.DOWN]) == pytest.approx(0.4774, abs=1e-4)

    def test_chain_distribution_factorizes(self, params):
        dist = thermal_chain_distribution(MachineGeometry(n_sites=2), params)
        p = nuclear_excited_fraction(params, 10.0, 1.0)
        assert dist.conditional([Spin.DOWN, Spin.DOWN]) == pytest.approx(p * p, abs=1e-12)
        assert dist.total_weight == pytest.approx(1.0, abs=1e-12)
        assert dist.electron_flip_weight <= 2 * 1.5e-6

    def test_chain_distribution_cold(self, params):
        dist = thermal_chain_distribution(MachineGeometry(n_sites=3, temperature=1e-3), params)
        assert dist.conditional([Spin.UP] * 3) == pytest.approx(1.0, abs=1e-12)

    def test_sample_statistics(self, params, rng):
        dist = thermal_chain_distribution(MachineGeometry(n_sites=4), params)
        draws = np.array([[int(s) for s in dist.sample(rng)] for _ in range(5000)])
        # binomial: mean 0.477, sigma ~ 0.0035 over 20000 spins
        assert draws.mean() == pytest.approx(0.4774, abs=0.015)
