import math

import numpy as np
import pytest

from sparsemimo.channel import ChannelRealization, cfr_full, sample_channel
from sparsemimo.errors import PilotOutOfBand, PilotOverlap, ShapeMismatch
from sparsemimo.params import ChannelParams, MimoGeometry, SystemParams
from sparsemimo.pilots import (
    MeasurementMatrix,
    PilotPlan,
    default_plan,
    noise_variance,
    observe_pilots,
    pilot_indices,
)

INF = math.inf


def single_path(tau, gain=1.0, nt=4, nr=4):
    gains = np.full((1, nt * nr), gain, dtype=complex)
    return ChannelRealization([tau], gains, [1.0], nt, nr)


class TestPilotPlan:
    def test_two_antenna_example_indices(self):
        plan = PilotPlan(Np=4, D=4, theta=(0, 2), N=16)
        assert pilot_indices(plan, 1).tolist() == [0, 4, 8, 12]
        assert pilot_indices(plan, 2).tolist() == [2, 6, 10, 14]

    def test_last_index_reference_plan(self, plan):
        assert plan.theta[3] == 12
        assert pilot_indices(plan, 4)[-1] == 1020

    def test_indices_strictly_increasing(self, plan):
        for i in range(1, plan.Nt + 1):
            assert np.all(np.diff(pilot_indices(plan, i)) > 0)

    @pytest.mark.parametrize("i", [0, 5])
    def test_antenna_out_of_range(self, plan, i):
        with pytest.raises(IndexError):
            pilot_indices(plan, i)

    def test_total_overhead(self, plan):
        assert plan.total_overhead == 4 * 64

    def test_theta_out_of_range(self):
        with pytest.raises(PilotOverlap):
            PilotPlan(Np=4, D=4, theta=(0, 4), N=64)

    def test_theta_must_be_distinct(self):
        with pytest.raises(PilotOverlap):
            PilotPlan(Np=4, D=4, theta=(1, 1), N=64)

    def test_pilots_must_fit_in_band(self):
        with pytest.raises(PilotOutOfBand):
            PilotPlan(Np=5, D=4, theta=(0, 3), N=19)
        PilotPlan(Np=5, D=4, theta=(0, 3), N=20)

    def test_combs_are_disjoint(self, plan):
        used = np.concatenate([pilot_indices(plan, i) for i in range(1, plan.Nt + 1)])
        assert len(set(used.tolist())) == used.size


class TestDefaultPlan:
    def test_even_spread(self):
        assert default_plan(MimoGeometry(4, 4), 64, 16, 4096).theta == (0, 4, 8, 12)

    def test_two_antenna_plan(self):
        assert default_plan(MimoGeometry(2, 1), 4, 4, 16).theta == (0, 2)

    def test_non_divisible_falls_back_to_consecutive(self):
        assert default_plan(MimoGeometry(3, 1), 8, 16, 256).theta == (0, 1, 2)

    def test_too_many_antennas(self):
        with pytest.raises(PilotOverlap):
            default_plan(MimoGeometry(5, 1), 4, 4, 64)


class TestObservePilots:
    def test_zero_delay_is_constant(self, plan, system):
        c = 0.3 - 0.7j
        H = observe_pilots(single_path(0.0, c), plan, system, INF, 0)
        assert H.shape == (64, 16)
        assert np.all(H.data == c)

    def test_single_mode_row_ratio(self, plan, system):
        tau = 5.3 * system.Ts
        H = observe_pilots(single_path(tau, 1 - 2j), plan, system, INF, 0).data
        ratio = H[1:] / H[:-1]
        expected = np.exp(-2j * np.pi * plan.D * 5.3 / system.N)
        np.testing.assert_allclose(ratio, expected, rtol=1e-12)

    def test_matches_full_cfr_at_pilots(self, plan, system, itu, geometry):
        chan = sample_channel(itu, geometry, 3)
        H = observe_pilots(chan, plan, system, INF, 0).data
        full = cfr_full(chan, system)
        for i in range(1, plan.Nt + 1):
            cols = slice((i - 1) * geometry.Nr, i * geometry.Nr)
            ref = full[pilot_indices(plan, i), cols]
            assert np.max(np.abs(H[:, cols] - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_column_block_ordering(self, plan, system):
        # only pair (i=2, j=3) has a nonzero gain
        gains = np.zeros((1, 16), complex)
        gains[0, MimoGeometry(4, 4).pair_index(2, 3)] = 1.0
        chan = ChannelRealization([3 * system.Ts], gains, [1.0], 4, 4)
        H = observe_pilots(chan, plan, system, INF, 0).data
        assert np.count_nonzero(np.abs(H).sum(axis=0)) == 1
        assert np.abs(H[:, 1 * 4 + 2]).min() == pytest.approx(1.0)

    def test_deterministic_for_seed(self, plan, system, itu, geometry):
        chan = sample_channel(itu, geometry, 1)
        a = observe_pilots(chan, plan, system, 10.0, 5).data
        b = observe_pilots(chan, plan, system, 10.0, 5).data
        c = observe_pilots(chan, plan, system, 10.0, 6).data
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_symbol_index_carried(self, plan, system):
        chan = single_path(0.0).with_gains(np.ones((1, 16)), 7)
        assert observe_pilots(chan, plan, system, INF, 0).symbol_index == 7

    def test_plan_geometry_mismatch(self, system):
        plan = default_plan(MimoGeometry(2, 2), 64, 16, system.N)
        with pytest.raises(ShapeMismatch):
            observe_pilots(single_path(0.0), plan, system, INF, 0)

    def test_noiseless_flag(self):
        assert noise_variance(INF) == 0.0
        assert noise_variance(10.0) == pytest.approx(0.1)
        assert noise_variance(0.0) == 1.0


class TestProperties:
    @pytest.mark.parametrize("tau_ts", [0.0, 5.3, 17.25, 200.9])
    def test_aliasing_period_invariance(self, plan, system, tau_ts):
        period = system.N * system.Ts / plan.D
        a = observe_pilots(single_path(tau_ts * system.Ts, 0.8 + 0.1j), plan, system, INF, 0).data
        b = observe_pilots(single_path(tau_ts * system.Ts + period, 0.8 + 0.1j), plan, system, INF, 0).data
        # the theta=0 comb is exactly periodic in the delay
        np.testing.assert_allclose(b[:, :4], a[:, :4], rtol=0, atol=1e-10)
        # an offset comb picks up the constant phase exp(-j 2 pi theta_i / D) per column,
        # which leaves the column space (and hence the delays) unchanged
        for i in range(2, plan.Nt + 1):
            cols = slice((i - 1) * 4, i * 4)
            rot = np.exp(-2j * np.pi * plan.theta[i - 1] / plan.D)
            np.testing.assert_allclose(b[:, cols], a[:, cols] * rot, rtol=0, atol=1e-10)

    def test_noise_whiteness(self, plan, system):
        snr = 7.0
        chan = single_path(2.5 * system.Ts, 1.0, 4, 4)
        clean = observe_pilots(chan, plan, system, INF, 0).data
        noise = np.concatenate([
            (observe_pilots(chan, plan, system, snr, seed).data - clean).ravel() for seed in range(100)
        ])
        assert noise.size >= 100_000
        var = noise_variance(snr)
        assert abs(np.mean(np.abs(noise) ** 2) / var - 1) < 0.05
        # circular symmetry: real and imaginary parts each carry half
        assert abs(np.var(noise.real) / (var / 2) - 1) < 0.05
        assert abs(np.mean(noise ** 2)) < 0.05 * var

    @pytest.mark.parametrize("P,Np,nt,nr", [(3, 16, 2, 2), (6, 64, 4, 4), (6, 8, 2, 2), (5, 12, 1, 3)])
    def test_rank_property(self, P, Np, nt, nr, rng):
        system = SystemParams()
        geometry = MimoGeometry(nt, nr)
        plan = default_plan(geometry, Np, 16, system.N)
        ch = ChannelParams.uniform_random(P, 20e-6)
        chan = sample_channel(ch, geometry, int(rng.integers(1 << 30)))
        s = np.linalg.svd(observe_pilots(chan, plan, system, INF, 0).data, compute_uv=False)
        rank = min(P, Np, nt * nr)
        assert s[rank - 1] > 1e-8 * s[0]
        if rank < s.size:
            assert s[rank] < 1e-8 * s[0]

    def test_gamma(self, system):
        assert system.gamma == np.exp(-2j * np.pi * system.fs / system.N)

    def test_measurement_matrix_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            MeasurementMatrix(np.array([[np.nan]]), 10.0)
