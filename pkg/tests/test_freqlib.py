"""Frequency vectors and exhaustive non-resonance certificates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusstab import (
    DiophantineCertificate,
    EnumerationBudgetError,
    Frequency,
    diophantine_constant,
    golden_frequency,
    is_completely_nonresonant,
)
from torusstab.freqlib import _lattice_half_ball


class TestFrequency:
    def test_golden_components(self):
        freq = golden_frequency(2)
        assert freq.omega[0] == 1.0
        assert freq.omega[1] == pytest.approx((1.0 + math.sqrt(5.0)) / 2.0, abs=0.0)
        assert freq.d == 2

    def test_golden_only_d2(self):
        with pytest.raises(ValueError):
            golden_frequency(3)

    def test_rejects_short_zero_nonfinite(self):
        with pytest.raises(ValueError):
            Frequency((1.0,))
        with pytest.raises(ValueError):
            Frequency((0.0, 0.0))
        with pytest.raises(ValueError):
            Frequency((1.0, math.inf))

    def test_scaled(self):
        freq = Frequency((1.0, 2.0)).scaled(3.0)
        assert freq.omega == (3.0, 6.0)


class TestLatticeHalfBall:
    def test_count_d2(self):
        # full punctured ball has 2K(K+1) points for d=2; half keeps exactly half
        for K in (1, 2, 5, 9):
            ks = _lattice_half_ball(2, K)
            assert len(ks) == K * (K + 1)

    def test_representatives_first_nonzero_positive(self):
        ks = _lattice_half_ball(3, 4)
        for k in ks:
            nz = k[np.nonzero(k)[0]]
            assert nz[0] > 0

    def test_no_pair_duplicates(self):
        ks = _lattice_half_ball(2, 6)
        seen = {tuple(k) for k in ks}
        assert all(tuple(-k) not in seen for k in ks)


class TestDiophantineConstant:
    def test_golden_is_one_at_every_cutoff(self):
        # |F_{n+1} - phi F_n| |k|_1 = phi^{-n} F_{n+2} -> phi^2/sqrt(5) > 1,
        # so the minimizer is always k = (1, 0); frozen via 50-digit arithmetic
        freq = golden_frequency(2)
        for K in (1, 5, 34, 200):
            cert = diophantine_constant(freq, 1.0, K)
            assert cert.gamma_K == pytest.approx(1.0, rel=1e-14)
            assert tuple(abs(v) for v in cert.attained_k) == (1, 0)

    def test_golden_tau_half_oracle(self):
        freq = golden_frequency(2)
        cert5 = diophantine_constant(freq, 0.5, 5)
        assert cert5.gamma_K == pytest.approx(0.52786404500042061, rel=1e-14)
        assert tuple(abs(v) for v in cert5.attained_k) == (3, 2)
        cert34 = diophantine_constant(freq, 0.5, 34)
        assert cert34.gamma_K == pytest.approx(0.20082879237757646, rel=1e-14)
        assert tuple(abs(v) for v in cert34.attained_k) == (21, 13)

    def test_sqrt2_oracle(self):
        freq = Frequency((1.0, math.sqrt(2.0)))
        cert = diophantine_constant(freq, 1.0, 29)
        assert cert.gamma_K == pytest.approx(0.8284271247461901, rel=1e-14)
        assert tuple(abs(v) for v in cert.attained_k) == (1, 1)

    def test_alpha_property(self):
        cert = DiophantineCertificate(tau=1.0, K=10, gamma_K=0.5, attained_k=(1, 0))
        assert cert.alpha == 0.05

    def test_budget_cap(self):
        with pytest.raises(EnumerationBudgetError):
            diophantine_constant(golden_frequency(2), 1.0, 201)
        # raising the cap explicitly is allowed
        cert = diophantine_constant(golden_frequency(2), 1.0, 201, cap=250)
        assert cert.K == 201

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            diophantine_constant(golden_frequency(2), 1.0, 0)
        with pytest.raises(ValueError):
            diophantine_constant(golden_frequency(2), -0.5, 5)

    @given(
        w2=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
        K=st.integers(min_value=1, max_value=12),
        tau=st.floats(min_value=0.0, max_value=2.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_K_and_matches_bruteforce(self, w2, K, tau):
        freq = Frequency((1.0, w2))
        cert = diophantine_constant(freq, tau, K)
        # brute force over the full (unhalved) punctured ball
        best = math.inf
        for k1 in range(-K, K + 1):
            for k2 in range(-K, K + 1):
                n = abs(k1) + abs(k2)
                if 0 < n <= K:
                    best = min(best, abs(k1 + w2 * k2) * n**tau)
        assert cert.gamma_K == pytest.approx(best, rel=1e-12, abs=1e-300)
        if K > 1:
            prev = diophantine_constant(freq, tau, K - 1)
            assert cert.gamma_K <= prev.gamma_K + 1e-15


class TestCompletelyNonresonant:
    def test_golden(self):
        freq = golden_frequency(2)
        assert is_completely_nonresonant(freq, 0.2, 5)
        assert not is_completely_nonresonant(freq, 2.0, 5)

    def test_resonant_frequency(self):
        assert not is_completely_nonresonant(Frequency((1.0, 2.0)), 0.1, 3)

    def test_certificate_consistency(self):
        freq = Frequency((1.0, math.sqrt(3.0)))
        cert = diophantine_constant(freq, 1.0, 8)
        assert is_completely_nonresonant(freq, cert.alpha, 8)
