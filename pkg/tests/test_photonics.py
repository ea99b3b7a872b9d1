import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from npverify.photonics import (ClickOutcome, OpticalParams, calibrate_visibility, click_probabilities,
                                ideal_detect_prob, sample_click, sample_clicks, sample_floor_clicks,
                                trace_from_csv, trace_to_csv)

mp.mp.dps = 40


def mp_clicks(mu, nu):
    """Independent high-precision evaluation of the correct/wrong/double click laws."""
    mu, nu = mp.mpf(mu), mp.mpf(nu)
    good = 1 - mp.exp(-2 * nu * mu)
    bad = 1 - mp.exp(-2 * (1 - nu) * mu)
    return float(good * (1 - bad)), float((1 - good) * bad), float(good * bad)


mus = st.floats(0, 20, allow_nan=False)
nus = st.floats(0, 1)
darks = st.floats(0, 0.5)


class TestIdeal:
    def test_vacuum(self):
        assert ideal_detect_prob(0.0, 0) == (0.0, 0.0)

    def test_bright_limit(self):
        d0, d1 = ideal_detect_prob(50.0, 0)
        assert d0 == pytest.approx(1.0) and d1 == 0.0

    def test_value(self):
        # 1 - e^{-2.62} by mpmath
        assert ideal_detect_prob(1.31, 1)[1] == pytest.approx(0.927197137172564, abs=1e-14)
        assert round(ideal_detect_prob(1.31, 0)[0], 4) == 0.9272

    def test_negative(self):
        with pytest.raises(ValueError):
            ideal_detect_prob(-0.1, 0)


class TestClickProbabilities:
    def test_perfect_visibility(self):
        cp = click_probabilities(OpticalParams(mu=0.8, nu=1.0))
        assert cp.p_w == 0 and cp.p_dc == 0
        assert cp.p_c == pytest.approx(1 - math.exp(-1.6), abs=1e-15)
        assert cp.p_h == ideal_detect_prob(0.8, 0)[0]

    def test_against_oracle(self):
        cp = click_probabilities(OpticalParams(mu=1.15, nu=0.95))
        assert (cp.p_c, cp.p_w, cp.p_dc) == pytest.approx(mp_clicks(1.15, 0.95), abs=1e-14)
        # rounded values quoted for this operating point
        assert cp.p_c == pytest.approx(0.7912, abs=2e-4)
        assert cp.p_w == pytest.approx(0.0122, abs=1e-4)
        assert cp.p_dc == pytest.approx(0.0964, abs=1e-4)

    def test_single_click_sum(self):
        cp = click_probabilities(OpticalParams(mu=1.30, nu=0.93))
        assert cp.p_c + cp.p_w == pytest.approx(0.774153822643229, abs=1e-13)

    @given(mus, nus, darks)
    def test_simplex(self, mu, nu, dark):
        cp = click_probabilities(OpticalParams(mu, nu, dark))
        assert abs(cp.p_c + cp.p_w + cp.p_dc + cp.p_none - 1) < 1e-12
        assert cp.p_h == pytest.approx(cp.p_c + cp.p_w + cp.p_dc, abs=1e-15)
        for v in (cp.p_c, cp.p_w, cp.p_dc, cp.p_none, cp.p_h, cp.p_d):
            assert 0.0 <= v <= 1.0

    @given(st.floats(0.01, 5), st.floats(0.5, 0.99), st.floats(0.001, 0.01))
    def test_monotone_in_visibility(self, mu, nu, step):
        lo = click_probabilities(OpticalParams(mu, nu))
        hi = click_probabilities(OpticalParams(mu, min(nu + step, 1.0)))
        assert hi.p_c >= lo.p_c - 1e-15
        assert hi.p_w <= lo.p_w + 1e-15

    @given(st.floats(0, 5), st.floats(0.01, 1), nus)
    def test_monotone_in_mu(self, mu, step, nu):
        assert click_probabilities(OpticalParams(mu + step, nu)).p_h >= click_probabilities(OpticalParams(mu, nu)).p_h

    @given(mus, nus, darks)
    def test_floor(self, mu, nu, dark):
        cp = click_probabilities(OpticalParams(mu, nu, dark))
        floor = -math.expm1(-mu)
        assert cp.p_h >= floor - 1e-15
        assert cp.floor().p_h == pytest.approx(floor, abs=1e-12)
        f = cp.floor()
        assert f.p_c + f.p_w + f.p_dc + f.p_none == pytest.approx(1, abs=1e-12)

    def test_dark_counts_negligible_at_operating_point(self):
        a = click_probabilities(OpticalParams(1.31, 0.93))
        b = click_probabilities(OpticalParams(1.31, 0.93, 1e-3))
        assert abs(a.p_h - b.p_h) < 1e-3
        assert b.p_h > a.p_h

    @pytest.mark.parametrize("kw", [dict(mu=-1), dict(mu=1, nu=1.2), dict(mu=1, p_dark=1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            OpticalParams(**kw)


class TestSampling:
    def test_degenerate(self, rng):
        cp = click_probabilities(OpticalParams(mu=40, nu=1.0))
        assert all(sample_click(cp, 0, rng) is ClickOutcome.D0 for _ in range(50))
        assert all(sample_click(cp, 1, rng) is ClickOutcome.D1 for _ in range(50))

    def test_chi_square(self, rng):
        cp = click_probabilities(OpticalParams(mu=1.31, nu=0.93))
        bits = rng.integers(0, 2, size=10**6, dtype=np.uint8)
        out = sample_clicks(cp, bits, rng)
        correct = int(((out == 1) & (bits == 0)).sum() + ((out == 2) & (bits == 1)).sum())
        single = int(((out == 1) | (out == 2)).sum())
        obs = [correct, single - correct, int((out == 3).sum()), int((out == 0).sum())]
        exp = np.array([cp.p_c, cp.p_w, cp.p_dc, cp.p_none]) * bits.size
        assert stats.chisquare(obs, exp).pvalue > 0.001
        for o, e, p in zip(obs, exp, [cp.p_c, cp.p_w, cp.p_dc, cp.p_none]):
            assert abs(o - e) <= 4 * math.sqrt(bits.size * p * (1 - p))

    def test_vacuum_floor_rate(self, rng):
        cp = click_probabilities(OpticalParams(mu=0.7, nu=0.93))
        out = sample_floor_clicks(cp, 200_000, rng)
        rate = np.count_nonzero(out) / out.size
        p = 1 - math.exp(-0.7)
        assert abs(rate - p) <= 4 * math.sqrt(p * (1 - p) / out.size)
        # D0 and D1 single clicks equally likely
        d0, d1 = (out == 1).sum(), (out == 2).sum()
        assert abs(d0 - d1) <= 4 * math.sqrt(d0 + d1)
        assert sample_click(cp, None, rng) in tuple(ClickOutcome)


class TestCalibration:
    def test_perfect(self):
        trace = np.array([1] * 80 + [0] * 20, dtype=np.uint8)
        assert calibrate_visibility(trace, 1.31) == 1.0

    def test_recovers_visibility(self):
        rng = np.random.default_rng(2024)
        cp = click_probabilities(OpticalParams(mu=1.31, nu=0.93))
        trace = sample_clicks(cp, np.zeros(10**6, dtype=np.uint8), rng)
        nu = calibrate_visibility(trace, 1.31)
        assert 0.9285 <= nu <= 0.9315

    def test_empty(self):
        with pytest.raises(ValueError):
            calibrate_visibility(np.array([], dtype=np.uint8), 1.0)


class TestTraceCsv:
    def test_round_trip(self, rng):
        t = rng.integers(0, 4, size=500).astype(np.uint8)
        text = trace_to_csv(t)
        assert text.startswith("pulse_index,outcome\n0,")
        assert set(line.split(",")[1] for line in text.strip().split("\n")[1:]) <= {"N", "0", "1", "B"}
        assert np.array_equal(trace_from_csv(text), t)

    @pytest.mark.parametrize("text", ["a,b\n", "pulse_index,outcome\n0,X\n", "pulse_index,outcome\n1,N\n"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            trace_from_csv(text)
