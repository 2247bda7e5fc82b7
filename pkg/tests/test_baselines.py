import math

import numpy as np
import pytest

from sparsemimo.baselines import (
    InterpMethod,
    comb_ls_interpolate,
    dense_comb_plan,
    grid_search_delays,
    projection_residual,
)
from sparsemimo.channel import ChannelRealization, cfr_full
from sparsemimo.errors import GridTooLarge
from sparsemimo.params import MimoGeometry, SystemParams
from sparsemimo.pilots import PilotPlan, default_plan, observe_pilots, pilot_indices

INF = math.inf

# small system: aliasing period 64 Ts, so a 1e-4 Ts grid has 640k points
SMALL = SystemParams(N=1024, fs=10e6, fc=1e9, Ng=64)


def channel(delays, gains, nt, nr):
    gains = np.asarray(gains, dtype=complex).reshape(len(delays), nt * nr)
    return ChannelRealization(delays, gains, np.ones(len(delays)), nt, nr)


def random_gains(rng, P, pairs):
    return (rng.standard_normal((P, pairs)) + 1j * rng.standard_normal((P, pairs))) / math.sqrt(2)


class TestGridSearch:
    def test_single_path_before_and_after_refinement(self, plan, system):
        tau = 5.3 * system.Ts
        H = observe_pilots(channel([tau], np.ones(16) * (0.6 - 0.2j), 4, 4), plan, system, INF, 0)
        res = 1e-3 * system.Ts
        coarse = grid_search_delays(H, plan, system, 1, res, refine=False)
        fine = grid_search_delays(H, plan, system, 1, res)
        assert abs(coarse[0] - tau) <= 1e-3 * system.Ts
        assert abs(fine[0] - tau) <= 1e-7 * system.Ts

    def test_objective_unimodal_near_truth(self, plan, system):
        # dense evaluation backs the golden-section refinement: one minimum within +/- resolution
        tau = 5.3 * system.Ts
        H = observe_pilots(channel([tau], np.ones(16), 4, 4), plan, system, INF, 0)
        ts = tau + np.linspace(-1e-3, 1e-3, 201) * system.Ts
        f = np.array([projection_residual(H, [t], plan, system) for t in ts])
        d = np.sign(np.diff(f))
        assert np.count_nonzero(d[1:] != d[:-1]) == 1

    def test_zero_delay(self, plan, system):
        H = observe_pilots(channel([0.0], np.ones(16), 4, 4), plan, system, INF, 0)
        assert grid_search_delays(H, plan, system, 1, 1e-3 * system.Ts).tolist() == [0.0]

    def test_two_paths_small_system(self, rng):
        geometry = MimoGeometry(2, 2)
        plan = default_plan(geometry, 16, 16, SMALL.N)
        truth = np.array([3.7, 9.15]) * SMALL.Ts
        H = observe_pilots(channel(truth, random_gains(rng, 2, 4), 2, 2), plan, SMALL, INF, 0)
        est = grid_search_delays(H, plan, SMALL, 2, 1e-4 * SMALL.Ts)
        assert np.all(np.abs(est - truth) <= 1e-5 * SMALL.Ts)

    def test_grid_guard(self, plan, system):
        H = observe_pilots(channel([0.0], np.ones(16), 4, 4), plan, system, INF, 0)
        with pytest.raises(GridTooLarge):
            grid_search_delays(H, plan, system, 1, 1e-4 * system.Ts)

    def test_resolution_must_be_positive(self, plan, system):
        H = observe_pilots(channel([0.0], np.ones(16), 4, 4), plan, system, INF, 0)
        with pytest.raises(ValueError):
            grid_search_delays(H, plan, system, 1, 0.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("snr", [INF, 10.0])
    def test_monotone_in_resolution(self, seed, snr):
        rng = np.random.default_rng(seed)
        geometry = MimoGeometry(2, 2)
        plan = default_plan(geometry, 16, 16, SMALL.N)
        truth = np.sort(rng.uniform(0, 60, 3)) * SMALL.Ts
        H = observe_pilots(channel(truth, random_gains(rng, 3, 4), 2, 2), plan, SMALL, snr, seed)
        res = 0.5 * SMALL.Ts
        last = math.inf
        for _ in range(5):
            d = grid_search_delays(H, plan, SMALL, 3, res)
            obj = projection_residual(H, d, plan, SMALL)
            # refined optima agree to rounding: allow a relative slack of 1e-9
            assert obj <= last * (1 + 1e-9) + 1e-28
            last = obj
            res /= 2


class TestCombInterpolation:
    @pytest.mark.parametrize("method", list(InterpMethod))
    def test_flat_channel(self, method):
        # the comb spans the whole band, so LowpassDft has no zero region
        system = SystemParams(N=256, fs=10e6, fc=1e9, Ng=32)
        plan = PilotPlan(Np=64, D=4, theta=(0,), N=256)
        c = 0.7 + 0.3j
        H = observe_pilots(channel([0.0], [c, c], 1, 2), plan, system, INF, 0)
        out = comb_ls_interpolate(H, plan, system, method)
        np.testing.assert_allclose(out, c, rtol=0, atol=1e-14)

    def test_linear_flat_reference_plan(self, plan, system):
        c = -0.4 + 0.9j
        H = observe_pilots(channel([0.0], np.full(16, c), 4, 4), plan, system, INF, 0)
        out = comb_ls_interpolate(H, plan, system, InterpMethod.LINEAR)
        np.testing.assert_allclose(out, c, rtol=0, atol=1e-15)

    def test_linear_exact_at_pilots(self, plan, system, itu, geometry):
        from sparsemimo.channel import sample_channel

        H = observe_pilots(sample_channel(itu, geometry, 0), plan, system, 10.0, 1)
        out = comb_ls_interpolate(H, plan, system, "linear")
        for i in range(1, plan.Nt + 1):
            cols = slice((i - 1) * 4, i * 4)
            assert np.array_equal(out[pilot_indices(plan, i), cols], H.data[:, cols])

    def test_linear_edges_hold_nearest_pilot(self, plan, system, itu, geometry):
        from sparsemimo.channel import sample_channel

        H = observe_pilots(sample_channel(itu, geometry, 0), plan, system, 10.0, 1)
        out = comb_ls_interpolate(H, plan, system, "linear")
        # antenna 4 starts at subcarrier 12 and ends at 1020
        assert np.all(out[:12, 12] == H.data[0, 12])
        assert np.all(out[1021:, 12] == H.data[-1, 12])

    def test_linear_midpoint(self, system):
        plan = PilotPlan(Np=2, D=4, theta=(0,), N=16)
        sys16 = SystemParams(N=16, fs=10e6, fc=1e9, Ng=4)
        from sparsemimo.pilots import MeasurementMatrix

        H = MeasurementMatrix(np.array([[0.0], [4.0 + 8.0j]]), INF)
        out = comb_ls_interpolate(H, plan, sys16, InterpMethod.LINEAR)
        assert out[2, 0] == 2.0 + 4.0j

    def test_lowpass_exact_on_grid(self):
        system = SystemParams(N=256, fs=10e6, fc=1e9, Ng=32)
        plan = PilotPlan(Np=64, D=4, theta=(0, 2), N=256)
        chan = channel([8 * system.Ts], [1.0, -0.5j, 0.3 + 0.3j, 2.0], 2, 2)
        H = observe_pilots(chan, plan, system, INF, 0)
        out = comb_ls_interpolate(H, plan, system, InterpMethod.LOWPASS_DFT)
        ref = cfr_full(chan, system)
        # antenna 1 spans the whole band; antenna 2's span starts at theta=2
        np.testing.assert_allclose(out[:, :2], ref[:, :2], rtol=0, atol=1e-12)
        np.testing.assert_allclose(out[2:, 2:], ref[2:, 2:], rtol=0, atol=1e-12)
        assert np.all(out[:2, 2:] == 0)

    def test_lowpass_zero_outside_span(self, plan, system, itu, geometry):
        from sparsemimo.channel import sample_channel

        H = observe_pilots(sample_channel(itu, geometry, 0), plan, system, INF, 0)
        out = comb_ls_interpolate(H, plan, system, InterpMethod.LOWPASS_DFT)
        span = plan.Np * plan.D
        for i, theta in enumerate(plan.theta):
            cols = slice(i * 4, (i + 1) * 4)
            assert np.all(out[:theta, cols] == 0)
            assert np.all(out[theta + span:, cols] == 0)
            assert np.any(out[theta:theta + span, cols] != 0)


class TestDenseCombPlan:
    def test_reference_plan_gets_256_pilots(self, plan):
        dense = dense_comb_plan(plan)
        assert dense.Np == 256 and dense.theta == plan.theta and dense.D == plan.D
        assert pilot_indices(dense, 4)[-1] == 4092

    def test_fills_band_exactly(self):
        dense = dense_comb_plan(PilotPlan(Np=2, D=4, theta=(0, 3), N=18))
        # antenna 2 ends at 3 + 3*4 = 15; one more pilot would be 19 > 17
        assert dense.Np == 4
