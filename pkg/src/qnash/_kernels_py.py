"""Pure-Python regeneration-cycle kernels.

This module is the reference implementation of the hot loops.  The compiled
module _kernels.pyx mirrors it statement for statement; both consume the
same SplitMix64 streams and must produce bitwise-identical output.  Keep the
two in sync, including the order of random draws:

  parallel queues: action uniform, service (if joined), inter-arrival
  sensing:         sensing uniform, service demand, inter-arrival
  observable:      action uniform (decision epochs only), service (if
                   joined), inter-arrival

Cycle layout: the first arrival finds the empty system and is always
recorded; the cycle ends at the next arrival that finds the system empty
again (that arrival belongs to the following cycle).  A cap of n stops the
cycle after n recorded decision epochs.  Status codes: 0 complete,
1 truncated by the cap, 2 hard arrival limit exceeded.
"""

import numpy as np

from . import rng

COMPILED = False

STATUS_OK = 0
STATUS_TRUNCATED = 1
STATUS_HARD_LIMIT = 2


def _sample(code, a, b, c, d, stream):
    if code == 0:
        return a
    if code == 1:
        return rng.exponential(stream, a)
    if code == 2:
        return rng.standard_gamma(stream, a) * b
    if code == 3:
        return a + (b - a) * stream.uniform()
    if code == 4:
        return c + d * rng.beta_variate(stream, a, b)
    if code == 5:
        return b if stream.uniform() < a else 0.0
    raise ValueError("unknown distribution code %r" % (code,))


def sample_many(code, params, n, stream):
    a, b, c, d = (float(v) for v in params)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = _sample(code, a, b, c, d, stream)
    return out


def _draw_action(probs, u):
    """Index of the sampled action; the last action absorbs float slack."""
    cum = 0.0
    for i in range(len(probs) - 1):
        cum += probs[i]
        if u < cum:
            return i
    return len(probs) - 1


def simulate_parallel(svc_codes, svc_params, ia_code, ia_params, rewards,
                      costs, svc_means, probs, cap, hard_limit, stream):
    """One cycle of the parallel-queues joining game.

    Returns (vbar_rows, status).  Row j holds the conditional utility of
    each action for the j-th arrival given the workloads it observes; the
    last column (balking) is identically zero.
    """
    m = len(svc_codes)
    k = m + 1
    codes = [int(v) for v in svc_codes]
    pars = [[float(v) for v in svc_params[i]] for i in range(m)]
    ia = [float(v) for v in ia_params]
    ia_c = int(ia_code)
    rew = [float(v) for v in rewards]
    cost = [float(v) for v in costs]
    means = [float(v) for v in svc_means]
    p = [float(v) for v in probs]
    w = [0.0] * m

    size = 64
    rows = np.empty((size, k), dtype=np.float64)
    j = 0
    status = STATUS_OK
    while True:
        empty = True
        for i in range(m):
            if w[i] != 0.0:
                empty = False
                break
        if j > 0 and empty:
            break
        if cap > 0 and j >= cap:
            status = STATUS_TRUNCATED
            break
        if j >= hard_limit:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, k), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
        for i in range(m):
            rows[j, i] = rew[i] - cost[i] * (w[i] + means[i])
        rows[j, m] = 0.0
        j += 1

        a = _draw_action(p, stream.uniform())
        y = 0.0
        if a < m:
            q = pars[a]
            y = _sample(codes[a], q[0], q[1], q[2], q[3], stream)
        gap = _sample(ia_c, ia[0], ia[1], ia[2], ia[3], stream)
        for i in range(m):
            acc = w[i]
            if i == a:
                acc = acc + y
            acc = acc - gap
            w[i] = acc if acc > 0.0 else 0.0
    return rows[:j].copy(), status


def simulate_sensing(svc_code, svc_params, ia_code, ia_params, sense_cost,
                     wait_cost, p_sense, svc_mean, busy_frac, cap,
                     hard_limit, stream):
    """One cycle of the sensing game (one server plus an overflow queue).

    Returns (vbar_rows, control_rows, status).  Control row j collects the
    three zero-mean summands used for variance reduction: the centered
    sensing indicator, the centered service demand, and the centered
    server-1 busy indicator.
    """
    spar = [float(v) for v in svc_params]
    svc_c = int(svc_code)
    ia = [float(v) for v in ia_params]
    ia_c = int(ia_code)
    cs = float(sense_cost)
    cw = float(wait_cost)
    ps = float(p_sense)
    mean_y = float(svc_mean)
    bf = float(busy_frac)
    x1 = 0.0
    x2 = 0.0

    size = 64
    rows = np.empty((size, 2), dtype=np.float64)
    ctrl = np.empty((size, 3), dtype=np.float64)
    j = 0
    status = STATUS_OK
    while True:
        if j > 0 and x1 == 0.0 and x2 == 0.0:
            break
        if cap > 0 and j >= cap:
            status = STATUS_TRUNCATED
            break
        if j >= hard_limit:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, 2), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
            bigger = np.empty((size, 3), dtype=np.float64)
            bigger[:j] = ctrl
            ctrl = bigger
        busy = 1.0 if x1 > 0.0 else 0.0
        rows[j, 0] = -cs - cw * busy * x2
        rows[j, 1] = -cw * x2

        sensed = 1.0 if stream.uniform() < ps else 0.0
        y = _sample(svc_c, spar[0], spar[1], spar[2], spar[3], stream)
        ctrl[j, 0] = sensed - ps
        ctrl[j, 1] = y - mean_y
        ctrl[j, 2] = busy - bf
        j += 1

        to_first = sensed == 1.0 and x1 == 0.0
        gap = _sample(ia_c, ia[0], ia[1], ia[2], ia[3], stream)
        acc = x1
        if to_first:
            acc = acc + y
        acc = acc - gap
        x1 = acc if acc > 0.0 else 0.0
        acc = x2
        if not to_first:
            acc = acc + y
        acc = acc - gap
        x2 = acc if acc > 0.0 else 0.0
    return rows[:j].copy(), ctrl[:j].copy(), status


def simulate_observable(svc_code, svc_params, ia_code, ia_params, reward,
                        cost, svc_mean, threshold, behavior, cap,
                        hard_limit, stream):
    """One cycle of the observable single queue with forced balking.

    Arrivals that observe more than `threshold` customers balk outright and
    are not decision epochs: no row, no strategy draw.  Returns
    (vbar_rows, signals, arrivals, status) where arrivals counts every
    arrival including forced balkers.
    """
    spar = [float(v) for v in svc_params]
    svc_c = int(svc_code)
    ia = [float(v) for v in ia_params]
    ia_c = int(ia_code)
    r = float(reward)
    c = float(cost)
    mean_y = float(svc_mean)
    kk = int(threshold)
    join_p = [float(behavior[s, 0]) for s in range(kk + 1)]

    ring = [0.0] * (kk + 3)  # scheduled departure times, FCFS order
    ring_n = kk + 3
    head = 0
    tail = 0
    count = 0
    last_dep = 0.0
    t = 0.0

    size = 64
    rows = np.empty((size, 2), dtype=np.float64)
    signals = np.empty(size, dtype=np.int64)
    j = 0
    arrivals = 0
    status = STATUS_OK
    while True:
        while count > 0 and ring[head] <= t:
            head = (head + 1) % ring_n
            count -= 1
        if count > kk:
            arrivals += 1
            if arrivals >= hard_limit:
                status = STATUS_HARD_LIMIT
                break
            t = t + _sample(ia_c, ia[0], ia[1], ia[2], ia[3], stream)
            continue
        if j > 0 and count == 0:
            break
        if cap > 0 and j >= cap:
            status = STATUS_TRUNCATED
            break
        if arrivals >= hard_limit:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, 2), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
            bigger_i = np.empty(size, dtype=np.int64)
            bigger_i[:j] = signals
            signals = bigger_i
        if count == 0:
            rows[j, 0] = r - c * mean_y
        else:
            rows[j, 0] = r - c * (count * mean_y + (ring[head] - t))
        rows[j, 1] = 0.0
        signals[j] = count
        j += 1
        arrivals += 1

        if stream.uniform() < join_p[count]:
            y = _sample(svc_c, spar[0], spar[1], spar[2], spar[3], stream)
            start = last_dep if last_dep > t else t
            dep = start + y
            ring[tail] = dep
            tail = (tail + 1) % ring_n
            count += 1
            last_dep = dep
        t = t + _sample(ia_c, ia[0], ia[1], ia[2], ia[3], stream)
    return rows[:j].copy(), signals[:j].copy(), arrivals, status
