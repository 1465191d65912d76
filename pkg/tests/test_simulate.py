import numpy as np
import pytest

from conftest import geometric_law
from mg1learn import phtype, qbd, simulate
from mg1learn.qbd import QueueInstance
from mg1learn.simulate import SimConfig


def tv_distance(dist_a, dist_b) -> float:
    return 0.5 * (
        np.abs(dist_a.probs - dist_b.probs).sum()
        + abs(dist_a.tail_mass - dist_b.tail_mass)
    )


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(warmup_events=10, horizon_events=10)


@pytest.mark.slow
def test_mm1_matches_geometric_law(exp1):
    cfg = SimConfig(warmup_events=10_000, horizon_events=1_000_000, seed=5)
    dist = simulate.simulate_queue(QueueInstance(0.5, exp1), cfg)
    exact = qbd.QueueLengthDistribution(
        probs=geometric_law(0.5), tail_mass=0.5**70
    )
    assert tv_distance(dist, exact) < 0.01


def test_zero_arrival_rate(exp1):
    cfg = SimConfig(warmup_events=10, horizon_events=100, seed=1)
    dist = simulate.simulate_queue(QueueInstance(0.0, exp1), cfg)
    assert dist.probs[0] == 1.0
    assert dist.probs[1:].sum() == 0.0
    assert dist.tail_mass == 0.0


def test_deterministic(erlang2):
    cfg = SimConfig(warmup_events=100, horizon_events=20_000, seed=12)
    a = simulate.simulate_queue(QueueInstance(0.7, erlang2), cfg)
    b = simulate.simulate_queue(QueueInstance(0.7, erlang2), cfg)
    np.testing.assert_array_equal(a.probs, b.probs)
    assert a.tail_mass == b.tail_mass


def test_distribution_is_normalized(hyperexp):
    unit = phtype.scale_to_unit_mean(hyperexp)
    cfg = SimConfig(warmup_events=1000, horizon_events=100_000, seed=3)
    dist = simulate.simulate_queue(QueueInstance(0.6, unit), cfg)
    assert np.all(dist.probs >= 0.0)
    assert dist.probs.sum() + dist.tail_mass == pytest.approx(1.0, abs=1e-12)


@pytest.mark.slow
def test_littles_law(erlang2):
    cfg = SimConfig(warmup_events=10_000, horizon_events=1_000_000, seed=21)
    _, stats = simulate.simulate_queue_with_stats(QueueInstance(0.7, erlang2), cfg)
    lhs = stats.mean_queue_length
    rhs = 0.7 * stats.mean_sojourn_time
    assert abs(lhs - rhs) / rhs < 0.02


@pytest.mark.slow
def test_longer_horizon_shrinks_tv(exp1):
    # monotone in expectation: compare mean TV over seeds at two horizons
    inst = QueueInstance(0.6, exp1)
    exact = qbd.solve(inst, l=70, epsilon=1.0)
    short, long = [], []
    for seed in range(4):
        c1 = SimConfig(warmup_events=2_000, horizon_events=50_000, seed=seed)
        c2 = SimConfig(warmup_events=2_000, horizon_events=400_000, seed=seed)
        short.append(tv_distance(simulate.simulate_queue(inst, c1), exact))
        long.append(tv_distance(simulate.simulate_queue(inst, c2), exact))
    assert np.mean(long) < np.mean(short)


def test_draw_service_sample(exp1):
    rng = np.random.default_rng(9)
    assert simulate.draw_service_sample(exp1, 0, rng).size == 0
    draws = simulate.draw_service_sample(exp1, 50_000, rng)
    assert np.all(draws > 0.0)
    # CLT bound: 3 standard errors of the mean for Exp(1)
    assert abs(draws.mean() - 1.0) < 3.0 / np.sqrt(draws.size)
    with pytest.raises(ValueError):
        simulate.draw_service_sample(exp1, -1, rng)
