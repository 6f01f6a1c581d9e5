"""Cycle simulation against hand-rolled oracles.

The single-queue oracle below replays the kernel's documented draw order
(action, service, inter-arrival) with a scalar Lindley recursion, so any
change to the simulation's randomness layout breaks these tests loudly.
"""

import numpy as np
import pytest

from qnash import rng
from qnash.distributions import Deterministic, Exponential, Uniform
from qnash.errors import ConfigurationError, InstabilityError
from qnash.models import (
    CycleRecord,
    GameModel,
    ObservableQueueModel,
    ParallelQueuesModel,
    SensingModel,
    as_behavioral,
    simulate_cycle,
    workload_recursion,
)
from qnash.simplex import SimplexPoint

from helpers import mm1_model, sensing_model, naor_model


# ---------------------------------------------------------------- recursion


def test_workload_recursion_join_and_drain():
    out = workload_recursion([1.0, 0.5], 0, 2.0, 0.8)
    assert out[0] == 1.0 + 2.0 - 0.8
    assert out[1] == 0.0  # 0.5 - 0.8 floors at zero


def test_workload_recursion_balk():
    out = workload_recursion([1.0, 0.5], None, 3.0, 0.25)
    assert out.tolist() == [0.75, 0.25]


def test_workload_recursion_exact_zero_floor():
    out = workload_recursion([1.5], 0, 0.5, 10.0)
    assert out[0] == 0.0


# ----------------------------------------------------------- M/M/1 cycles


def _mm1_cycle_oracle(stream, lam, reward=5.0, cost=1.0):
    """Scalar Lindley replay of an all-join M/M/1 cycle."""
    rows = []
    w = 0.0
    while True:
        if rows and w == 0.0:
            break
        rows.append((reward - cost * (w + 1.0), 0.0))
        stream.uniform()  # action draw, always joins
        y = rng.exponential(stream, 1.0)
        gap = rng.exponential(stream, lam)
        w = max(w + y - gap, 0.0)
    return np.array(rows)


@pytest.mark.parametrize("seed", [1, 8, 512])
def test_mm1_cycle_matches_scalar_oracle(seed):
    model = mm1_model(0.5)
    state = rng.substream(seed, 1, 1)
    record = model.simulate_cycle((1.0, 0.0), rng=rng.Stream(state))
    expect = _mm1_cycle_oracle(rng.Stream(state), 0.5)
    assert record.vbar_rows.tobytes() == expect.tobytes()
    assert record.cycle_length == expect.shape[0]
    assert not record.truncated


def test_first_arrival_row_is_exact():
    """The opening arrival always sees an empty system."""
    model = mm1_model(0.5, reward=7.0, cost=2.0)
    for seed in range(5):
        rec = model.simulate_cycle((1.0, 0.0), rng=rng.Stream(seed))
        assert rec.cycle_length >= 1
        assert rec.vbar_rows[0, 0] == 7.0 - 2.0
        assert rec.vbar_rows[0, 1] == 0.0


def test_cycle_lengths_are_uncorrelated():
    """Regeneration makes consecutive cycle lengths independent."""
    model = mm1_model(0.5)
    n = 10**4
    lengths = np.empty(n)
    for i in range(n):
        stream = rng.Stream(rng.substream(99, 1, i))
        lengths[i] = model.simulate_cycle((1.0, 0.0), rng=stream).cycle_length
    x = lengths - lengths.mean()
    r1 = (x[:-1] * x[1:]).mean() / x.var()
    assert abs(r1) < 0.05


def test_cap_noop_when_cycle_is_shorter():
    model = mm1_model(0.5)
    state = rng.substream(17, 1, 4)
    plain = model.simulate_cycle((1.0, 0.0), rng=rng.Stream(state))
    capped = model.simulate_cycle((1.0, 0.0), cap=10**6,
                                  rng=rng.Stream(state))
    assert capped.vbar_rows.tobytes() == plain.vbar_rows.tobytes()
    assert not capped.truncated


def test_cap_truncates_growing_cycle():
    model = ParallelQueuesModel(
        services=[Deterministic(2.0)], interarrival=Deterministic(1.0),
        reward=5.0, cost=1.0)
    rec = model.simulate_cycle((1.0, 0.0), cap=6, rng=rng.Stream(1))
    assert rec.truncated
    assert rec.cycle_length == 6


def test_hard_limit_raises_and_names_the_strategy():
    model = ParallelQueuesModel(
        services=[Deterministic(2.0)], interarrival=Deterministic(1.0),
        reward=5.0, cost=1.0)
    with pytest.raises(InstabilityError, match=r"100 arrivals.*\b1\b"):
        model.simulate_cycle((1.0, 0.0), rng=rng.Stream(1), hard_limit=100)


def test_simulate_cycle_requires_stream():
    with pytest.raises(ConfigurationError, match="Stream"):
        mm1_model(0.5).simulate_cycle((1.0, 0.0))


def test_simulate_cycle_rejects_silly_cap():
    with pytest.raises(ConfigurationError, match="cap"):
        mm1_model(0.5).simulate_cycle((1.0, 0.0), cap=0, rng=rng.Stream(1))


def test_module_level_alias():
    model = mm1_model(0.5)
    state = rng.substream(3, 1, 0)
    a = simulate_cycle(model, (1.0, 0.0), rng=rng.Stream(state))
    b = model.simulate_cycle((1.0, 0.0), rng=rng.Stream(state))
    assert a.vbar_rows.tobytes() == b.vbar_rows.tobytes()


def test_custom_value_fn_reproduces_builtin_rows():
    """A value_fn encoding the linear utility matches the fast path."""
    model = mm1_model(0.5)
    custom = ParallelQueuesModel(
        services=[Exponential(1.0)], interarrival=Exponential(0.5),
        reward=5.0, cost=1.0,
        value_fn=lambda w: [5.0 - 1.0 * (w[0] + 1.0), 0.0])
    state = rng.substream(21, 1, 2)
    a = model.simulate_cycle((0.8, 0.2), rng=rng.Stream(state))
    b = custom.simulate_cycle((0.8, 0.2), rng=rng.Stream(state))
    assert a.vbar_rows.tobytes() == b.vbar_rows.tobytes()


def test_custom_value_fn_shape_is_checked():
    model = ParallelQueuesModel(
        services=[Exponential(1.0)], interarrival=Exponential(0.5),
        reward=5.0, cost=1.0, value_fn=lambda w: [1.0, 2.0, 3.0])
    with pytest.raises(ConfigurationError, match="value_fn"):
        model.simulate_cycle((1.0, 0.0), rng=rng.Stream(1))


# ------------------------------------------------------------- observable


def test_observable_threshold_and_signal_count():
    model = naor_model()
    assert model.threshold == 1
    assert model.signal_count == 2


def test_observable_deterministic_walk_is_frozen():
    """Fully deterministic service and gaps pin every recorded row."""
    model = ObservableQueueModel(
        interarrival=Deterministic(1.0), service=Deterministic(1.3),
        reward=1.7, cost=1.0)
    assert model.threshold == 1
    rec = model.simulate_cycle(
        [[1.0, 0.0], [1.0, 0.0]], cap=4, rng=rng.Stream(5))
    assert rec.truncated
    assert rec.signals.tolist() == [0, 1, 1, 1]
    assert rec.vbar_rows[:, 0] == pytest.approx(
        [0.4, 0.1, -0.2, -0.5], rel=1e-12)
    assert np.all(rec.vbar_rows[:, 1] == 0.0)


def test_observable_signals_stay_within_threshold():
    model = naor_model()
    behavior = [[1.0, 0.0], [0.7, 0.3]]
    for i in range(200):
        rec = model.simulate_cycle(
            behavior, rng=rng.Stream(rng.substream(7, 1, i)))
        assert rec.signals.max() <= model.threshold
        assert rec.signals.min() >= 0


def test_observable_is_always_stable():
    assert naor_model().stable_for_all_strategies


def test_observable_rejects_bad_economics():
    with pytest.raises(ConfigurationError):
        ObservableQueueModel(interarrival=Exponential(1.0),
                             service=Exponential(1.0), reward=-1.0, cost=1.0)
    with pytest.raises(ConfigurationError):
        ObservableQueueModel(interarrival=Exponential(1.0),
                             service=Exponential(1.0), reward=1.7, cost=0.0)


# ---------------------------------------------------------------- sensing


def test_sensing_first_row_is_exact():
    model = sensing_model()
    for seed in range(4):
        rec = model.simulate_cycle((0.5, 0.5), rng=rng.Stream(seed))
        assert rec.vbar_rows[0, 0] == -model.sensing_cost
        assert rec.vbar_rows[0, 1] == 0.0
        assert rec.control_rows.shape[1] == 3


def test_sensing_control_row_components():
    """First arrival: server idle, so the centered summands are pinned."""
    model = SensingModel(arrival_rate=0.7, service=Deterministic(0.9),
                         sensing_cost=5.0, waiting_cost=1.0)
    p = 0.6
    rec = model.simulate_cycle((p, 1 - p), rng=rng.Stream(2))
    sensed = rec.control_rows[0, 0] + p
    assert sensed in (0.0, 1.0)
    assert rec.control_rows[0, 1] == 0.9 - model.service_mean  # == 0 here
    assert rec.control_rows[0, 2] == -model.busy_fraction(p)


def test_sensing_busy_fraction_formula():
    model = sensing_model(lam=0.7)
    assert model.busy_fraction(0.0) == 0.0
    lp = 0.7 * 0.6
    assert model.busy_fraction(0.6) == pytest.approx(lp / (lp + 1.0),
                                                     rel=1e-15)


def test_sensing_busy_fraction_empirical():
    """Busy indicator mean agrees with the loss-system closed form.

    PASTA applies (Poisson arrivals), so the arrival-average busy share
    estimates the time-stationary one.  Batch means over cycle batches
    give the standard error.
    """
    model = sensing_model(lam=0.7)
    p = 0.6
    theory = model.busy_fraction(p)
    batches = 25
    per = 6000
    means = np.empty(batches)
    for b in range(batches):
        tot = 0.0
        cnt = 0
        for i in range(per):
            stream = rng.Stream(rng.substream(1234, 1, b * per + i))
            rec = model.simulate_cycle((p, 1 - p), rng=stream)
            tot += (rec.control_rows[:, 2] + theory).sum()
            cnt += rec.cycle_length
        means[b] = tot / cnt
    se = means.std(ddof=1) / np.sqrt(batches)
    assert abs(means.mean() - theory) < 4 * se


def test_sensing_ell_tilde_closed_form_at_zero():
    model = SensingModel(arrival_rate=0.5, service=Exponential(1.0),
                         sensing_cost=5.0, waiting_cost=1.0)
    assert model.ell_tilde([[0.0, 1.0]]) == pytest.approx(2.0, abs=1e-15)


def test_sensing_ell_tilde_matches_rederivation():
    """Exact-rational replay of the independence approximation."""
    from fractions import Fraction as F

    model = sensing_model(lam=0.99)
    lam, mu, p = F(99, 100), F(1), F(1, 2)
    lam1 = lam * p
    idle1 = mu / (mu + lam1)
    lam2 = lam * (1 - p + lam1 / (lam1 + mu))
    idle2 = 1 - lam2 / mu
    assert model.ell_tilde([[0.5, 0.5]]) == pytest.approx(
        float(1 / (idle1 * idle2)), rel=1e-12)


def test_sensing_ell_tilde_outside_validity():
    model = SensingModel(arrival_rate=1.5, service=Exponential(1.0),
                         sensing_cost=5.0, waiting_cost=1.0)
    with pytest.raises(ConfigurationError, match="not positive"):
        model.ell_tilde([[0.9, 0.1]])


def test_sensing_constructor_validation():
    svc = Exponential(1.0)
    with pytest.raises(ConfigurationError):
        SensingModel(arrival_rate=0.0, service=svc, sensing_cost=5.0,
                     waiting_cost=1.0)
    with pytest.raises(ConfigurationError):
        SensingModel(arrival_rate=1.0, service="exp", sensing_cost=5.0,
                     waiting_cost=1.0)
    with pytest.raises(ConfigurationError):
        SensingModel(arrival_rate=1.0, service=svc, sensing_cost=-1.0,
                     waiting_cost=1.0)
    with pytest.raises(ConfigurationError):
        SensingModel(arrival_rate=1.0, service=svc, sensing_cost=5.0,
                     waiting_cost=0.0)


# ------------------------------------------------------------ construction


def test_parallel_stability_flag():
    assert mm1_model(0.5).stable_for_all_strategies
    assert not mm1_model(2.0).stable_for_all_strategies


def test_parallel_constructor_validation():
    with pytest.raises(ConfigurationError):
        ParallelQueuesModel(services=[], interarrival=Exponential(1.0),
                            reward=5.0, cost=1.0)
    with pytest.raises(ConfigurationError):
        ParallelQueuesModel(services=["exp"], interarrival=Exponential(1.0),
                            reward=5.0, cost=1.0)
    with pytest.raises(ConfigurationError):
        ParallelQueuesModel(services=[Exponential(1.0)],
                            interarrival="exp", reward=5.0, cost=1.0)
    with pytest.raises(ConfigurationError):
        ParallelQueuesModel(services=[Exponential(1.0)],
                            interarrival=Exponential(1.0),
                            reward=np.inf, cost=1.0)
    with pytest.raises(ConfigurationError):
        ParallelQueuesModel(services=[Exponential(1.0)],
                            interarrival=Exponential(1.0),
                            reward=5.0, cost=0.0)


def test_two_station_rewards_broadcast():
    model = ParallelQueuesModel(
        services=[Exponential(1.0), Uniform(0.0, 2.0)],
        interarrival=Exponential(0.4), reward=5.0, cost=[1.0, 2.0])
    assert model.k == 3
    assert model.rewards.tolist() == [5.0, 5.0]
    assert model.costs.tolist() == [1.0, 2.0]


def test_default_ell_tilde_is_one():
    assert GameModel().ell_tilde([[1.0, 0.0]]) == 1.0


# ------------------------------------------------------------ cycle record


def test_cycle_record_validation():
    good = dict(vbar_rows=np.zeros((3, 2)), signals=np.zeros(3, np.int64),
                control_rows=np.zeros((3, 0)), cycle_length=3,
                truncated=False)
    rec = CycleRecord(**good)
    assert rec.k == 2

    with pytest.raises(ConfigurationError):
        CycleRecord(**{**good, "cycle_length": 2})
    with pytest.raises(ConfigurationError):
        CycleRecord(**{**good, "signals": np.zeros(2, np.int64)})
    with pytest.raises(ConfigurationError):
        CycleRecord(**{**good, "vbar_rows": np.zeros((3, 1))})
    with pytest.raises(ConfigurationError):
        CycleRecord(**{**good, "control_rows": np.zeros((1, 2))})
    with pytest.raises(ConfigurationError):
        CycleRecord(**{**good, "signals": np.array([0, -1, 0])})
    with pytest.raises(ConfigurationError):
        CycleRecord(vbar_rows=np.zeros((0, 2)),
                    signals=np.zeros(0, np.int64),
                    control_rows=np.zeros((0, 0)), cycle_length=0,
                    truncated=False)


# ----------------------------------------------------------- as_behavioral


def test_as_behavioral_accepts_point_and_matrix():
    pt = SimplexPoint([0.3, 0.7])
    assert as_behavioral(pt, 2, 1).tolist() == [[0.3, 0.7]]
    assert as_behavioral([0.3, 0.7], 2, 1).tolist() == [[0.3, 0.7]]
    two = as_behavioral([pt, SimplexPoint([1.0, 0.0])], 2, 2)
    assert two.tolist() == [[0.3, 0.7], [1.0, 0.0]]


def test_as_behavioral_shape_errors():
    with pytest.raises(ConfigurationError, match="shape"):
        as_behavioral([0.3, 0.7], 2, 2)
    with pytest.raises(ConfigurationError, match="shape"):
        as_behavioral([0.2, 0.3, 0.5], 2, 1)
    with pytest.raises(ValueError):
        as_behavioral([0.9, 0.3], 2, 1)  # not a distribution
