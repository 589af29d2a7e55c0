import numpy as np
import pytest

from icrelay.channel import AntennaConfig, sample_channel
from icrelay.errors import (DegenerateChannelError, PowerHeadroomError,
                            UnstableConfigurationError)
from icrelay.scheme import build_plan
from icrelay.simulate import SnrSweep, rates_at_snr, slope_estimate


def test_sweep_validation():
    with pytest.raises(ValueError):
        SnrSweep(snr_points_db=(40, 60), trials=5, seed=1)
    with pytest.raises(ValueError):
        SnrSweep(snr_points_db=(40, 45, 50), trials=5, seed=1)
    with pytest.raises(ValueError):
        SnrSweep(snr_points_db=(40, 60, 50), trials=5, seed=1)
    with pytest.raises(ValueError):
        SnrSweep(snr_points_db=(40, 60, 80), trials=0, seed=1)
    sweep = SnrSweep(snr_points_db=(40, 60, 80), trials=2, seed=1)
    assert sweep.powers == (1e4, 1e6, 1e8)


class TestRates:
    def test_single_user_slope(self):
        # with no relay input the corner user runs an interference-free
        # zero-forcing link: m bits per 3 dB-doubling
        ch = sample_channel(AntennaConfig(4, 0, 2), 3)
        plan = build_plan(ch, corner=1)
        r1_lo, r2 = rates_at_snr(ch, plan, 1e5)
        r1_hi, _ = rates_at_snr(ch, plan, 1e7)
        assert r2 == 0.0
        slope = (r1_hi - r1_lo) / np.log2(1e7 / 1e5)
        assert abs(slope - 4.0) < 0.05

    def test_rates_nondecreasing_in_power(self):
        ch = sample_channel(AntennaConfig(4, 4, 2), 7)
        plan = build_plan(ch, corner=1)
        values = [rates_at_snr(ch, plan, p) for p in (1e4, 1e5, 1e6, 1e7, 1e8)]
        for (a1, a2), (b1, b2) in zip(values, values[1:]):
            assert b1 >= a1
            assert b2 >= a2

    def test_power_headroom_error(self):
        ch = sample_channel(AntennaConfig(4, 4, 2), 7)
        plan = build_plan(ch, corner=1)
        noise_fwd = float(np.trace(plan.a @ plan.a.conj().T).real)
        with pytest.raises(PowerHeadroomError):
            rates_at_snr(ch, plan, noise_fwd * 0.5)

    def test_whitening_invariance(self):
        # two algebraically equal whitenings give identical rates
        ch = sample_channel(AntennaConfig(4, 4, 2), 9)
        plan = build_plan(ch, corner=1)
        reference = rates_at_snr(ch, plan, 1e6)

        import icrelay.simulate as sim
        original = sim._inverse_sqrt

        def cholesky_whitening(q):
            return np.linalg.inv(np.linalg.cholesky(q))

        sim._inverse_sqrt = cholesky_whitening
        try:
            alt = rates_at_snr(ch, plan, 1e6)
        finally:
            sim._inverse_sqrt = original
        assert abs(alt[0] - reference[0]) <= 1e-10 * max(abs(reference[0]), 1.0)
        assert abs(alt[1] - reference[1]) <= 1e-10 * max(abs(reference[1]), 1.0)

    def test_backoff_converges_to_unity(self):
        # the relay's power headroom is asymptotically free: at high power
        # the effective per-stream power approaches the nominal split
        ch = sample_channel(AntennaConfig(4, 4, 2), 11)
        plan = build_plan(ch, corner=1)
        al = plan.allocation
        a = plan.a
        noise_fwd = float(np.trace(a @ a.conj().T).real)
        betas = []
        for p in (1e4, 1e6, 1e8):
            v1 = plan.v1 / np.linalg.norm(plan.v1, axis=0)
            v2 = plan.v2 / np.linalg.norm(plan.v2, axis=0)
            cov = (p / al.d1) * (ch.h01 @ v1 @ v1.conj().T @ ch.h01.conj().T)
            cov += (p / al.d2) * (ch.h02 @ v2 @ v2.conj().T @ ch.h02.conj().T)
            sig_fwd = float(np.trace(a @ cov @ a.conj().T).real)
            betas.append(min(1.0, (p - noise_fwd) / sig_fwd))
        assert betas == sorted(betas)
        assert betas[-1] == pytest.approx(min(1.0, betas[-1]))

    def test_extension_halves_rates(self):
        ch = sample_channel(AntennaConfig(1, 1, 1), 3)
        plan = build_plan(ch, corner=1)
        r1, r2 = rates_at_snr(ch, plan, 1e6)
        # two streams over two uses for user 1, one stream over two for user 2
        assert r1 > 2 * r2 - 2.0
        assert r2 > 0.0


class TestSlopeEstimate:
    def test_matches_formula_small_run(self):
        sweep = SnrSweep(snr_points_db=(40, 50, 60, 70, 80), trials=8, seed=5)
        est = slope_estimate(AntennaConfig(4, 4, 2), sweep)
        assert abs(est.sum_dof - 6.0) <= 0.6
        assert abs(est.per_user[0] - 4.0) <= 0.4
        assert abs(est.per_user[1] - 2.0) <= 0.2
        assert est.excluded == 0
        assert est.trials_used == 8
        assert len(est.rows) == 8 * 5

    def test_rows_cover_sweep(self):
        sweep = SnrSweep(snr_points_db=(40, 60, 80), trials=3, seed=9)
        est = slope_estimate(AntennaConfig(2, 2, 2), sweep)
        snrs = {row[0] for row in est.rows}
        assert snrs == {40.0, 60.0, 80.0}

    def test_unstable_configuration_error(self, monkeypatch):
        def always_degenerate(*args, **kwargs):
            raise DegenerateChannelError("forced")

        import icrelay.simulate as sim
        monkeypatch.setattr(sim, "build_plan", always_degenerate)
        sweep = SnrSweep(snr_points_db=(40, 60, 80), trials=5, seed=1)
        with pytest.raises(UnstableConfigurationError):
            slope_estimate(AntennaConfig(4, 4, 2), sweep)
