"""Model builders shared across test modules."""

from qnash import (BetaShiftScale, Exponential, Gamma, ObservableQueueModel,
                   ParallelQueuesModel, ScaledBernoulli, SensingModel, Uniform)


def mm1_model(lam, mu=1.0, reward=5.0, cost=1.0):
    """Join-or-balk M/M/1: one exponential station, Poisson arrivals."""
    return ParallelQueuesModel(
        services=[Exponential(mu)], interarrival=Exponential(lam),
        reward=reward, cost=cost)


def two_queue_model():
    """Two parallel GI/G/1 queues: Beta(10,10)+0.5 and Bernoulli(0.1)*10
    services, Gamma(0.1, 11) inter-arrivals, reward 5, cost 1."""
    return ParallelQueuesModel(
        services=[BetaShiftScale(10.0, 10.0, 0.5, 1.0),
                  ScaledBernoulli(0.1, 10.0)],
        interarrival=Gamma(0.1, 11.0), reward=5.0, cost=1.0)


def sensing_model(lam=0.99, mu=1.0, sensing_cost=5.0, waiting_cost=1.0):
    return SensingModel(arrival_rate=lam, service=Exponential(mu),
                        sensing_cost=sensing_cost, waiting_cost=waiting_cost)


def naor_model(reward=1.7, cost=1.0, lam=1.0, mu=1.0):
    """Observable M/M/1 with threshold floor(reward * mu / cost)."""
    return ObservableQueueModel(
        interarrival=Exponential(lam), service=Exponential(mu),
        reward=reward, cost=cost)


def naor_uniform_model(reward=1.7, cost=1.0, lam=1.0):
    """Same game with Uniform(0, 2) services (mean 1)."""
    return ObservableQueueModel(
        interarrival=Exponential(lam), service=Uniform(0.0, 2.0),
        reward=reward, cost=cost)
