import pytest

import vrstream


def test_worked_schedule_instance():
    # three users, ten slots, the shortfall-free optimum gives (2, 3, 2)
    res = vrstream.schedule(
        rates_bps=[10e6, 9e6, 10e6],
        afer_bps=[2e6, 2.7e6, 2e6],
        total_slots=7,
        coherence_slots=10,
        lambda_=0.0,
    )
    assert res["allocation"] == [2, 3, 2]
    assert res["max_violation_bps"] == pytest.approx(0.0, abs=1e-9)
    assert res["converged"]


def test_schedule_matches_exhaustive_search():
    rates = [3.7e6, 12.1e6, 6.9e6]
    afer = [1.1e6, 4.2e6, 0.9e6]
    fast = vrstream.schedule(rates, afer, total_slots=9, coherence_slots=11)
    best = vrstream.brute_force_schedule(rates, afer, total_slots=9, coherence_slots=11)
    assert fast["max_violation_bps"] == pytest.approx(best["max_violation_bps"], abs=1e-9)
    assert sum(fast["allocation"]) == 9


def test_tier_value_geometric_sum():
    beta = 0.25
    assert vrstream.tier_value(0, beta) == 1.0
    assert vrstream.tier_value(2, beta) == pytest.approx(1 + beta + beta * beta)


def test_reward_and_normalization():
    # two FoV tiles of four, one delivered at the top of a 3-level ladder
    beta = 0.2
    reward = vrstream.compute_reward(
        first_tile=0,
        delivered_quality=[2, -1, 0, -1],
        realized_fov=[0, 1],
        beta=beta,
        miss_penalty=1.0,
    )
    assert reward == pytest.approx(vrstream.tier_value(2, beta) - 1.0)
    full = vrstream.compute_reward(0, [2, 2, 2, 2], [0, 1], beta, 1.0)
    assert vrstream.normalized_reward(full, 2, beta, 3) == 1.0


def test_afer_scales_with_fov_size():
    ladder = [1e6, 2e6, 4e6]
    one = vrstream.afer_bps(ladder, 1.0)
    assert one == pytest.approx(sum(ladder) / len(ladder))
    assert vrstream.afer_bps(ladder, 2.5) == pytest.approx(2.5 * one)


def test_rate_math():
    # SNR chosen so the log term is exact: B log2(1 + 3) = 2B
    rate = vrstream.instantaneous_rate_bps(
        channel_power_gains=[3.0],
        beam_amplitudes=[1.0],
        bandwidth_hz=1e6,
        tx_power_w=1.0,
        noise_psd_w_per_hz=1e-6,
    )
    assert rate == pytest.approx(2e6)
    assert vrstream.average_rate_bps(rate, 5, 10) == pytest.approx(1e6)
    assert vrstream.dbm_to_watts(30.0) == pytest.approx(1.0)


def test_reduce_grid_any_overlap():
    # a 4x8 grid halves to 2x4; fine tile 0 lands in coarse tile 0
    assert vrstream.reduce_grid([0], 4, 8) == [0]
    # fine tiles straddling a coarse boundary mark both coarse tiles
    assert vrstream.reduce_grid([1, 2], 4, 8) == [0, 1]


def test_advantage_identity():
    assert vrstream.advantage(1.0, 0.9, 2.0, 0.5) == pytest.approx(1.0 + 0.9 * 2.0 - 0.5)
