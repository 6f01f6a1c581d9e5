# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled regeneration-cycle kernels.

Statement-for-statement mirror of _kernels_py.py; see that module for the
layout and draw-order contract.  The SplitMix64 stream state is read from
the Python Stream object once per cycle and written back at the end, so
both implementations walk the same variate sequence.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, log, pow, sqrt
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

COMPILED = True

STATUS_OK = 0
STATUS_TRUNCATED = 1
STATUS_HARD_LIMIT = 2

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15u
cdef double _TWO_PI = 6.283185307179586
cdef double _INV53 = 1.1102230246251565e-16  # 2**-53


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9u
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBu
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t *state) nogil:
    state[0] = state[0] + _GAMMA
    return <double>(_mix64(state[0]) >> 11) * _INV53


cdef double _std_normal(uint64_t *state) nogil:
    cdef double u1 = _uniform(state)
    cdef double u2
    while u1 == 0.0:
        u1 = _uniform(state)
    u2 = _uniform(state)
    return sqrt(-2.0 * log(u1)) * cos(_TWO_PI * u2)


cdef double _std_gamma(uint64_t *state, double shape) nogil:
    cdef double g, u, d, c, x, v
    if shape < 1.0:
        g = _std_gamma(state, shape + 1.0)
        u = _uniform(state)
        return g * pow(u, 1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        x = _std_normal(state)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(state)
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v
        if u == 0.0:
            continue
        if log(u) < 0.5 * x * x + d * (1.0 - v + log(v)):
            return d * v


cdef double _sample(uint64_t *state, int code, double a, double b,
                    double c, double d) nogil:
    cdef double x, y, total
    if code == 0:
        return a
    if code == 1:
        return -log(1.0 - _uniform(state)) / a
    if code == 2:
        return _std_gamma(state, a) * b
    if code == 3:
        return a + (b - a) * _uniform(state)
    if code == 4:
        x = _std_gamma(state, a)
        y = _std_gamma(state, b)
        total = x + y
        if total == 0.0:
            return c + d * 0.5
        return c + d * (x / total)
    # code == 5
    if _uniform(state) < a:
        return b
    return 0.0


def sample_many(code, params, n, stream):
    cdef uint64_t state = stream.state
    cdef int cd = code
    cdef double a = params[0], b = params[1], c = params[2], d = params[3]
    cdef Py_ssize_t i, nn = n
    out = np.empty(nn, dtype=np.float64)
    cdef double[::1] ov = out
    for i in range(nn):
        ov[i] = _sample(&state, cd, a, b, c, d)
    stream.state = state
    return out


cdef inline int _draw_action(double *probs, int k, double u) nogil:
    cdef double cum = 0.0
    cdef int i
    for i in range(k - 1):
        cum += probs[i]
        if u < cum:
            return i
    return k - 1


def simulate_parallel(svc_codes, svc_params, ia_code, ia_params, rewards,
                      costs, svc_means, probs, cap, hard_limit, stream):
    cdef int64_t[::1] codes = np.ascontiguousarray(svc_codes, dtype=np.int64)
    cdef double[:, ::1] pars = np.ascontiguousarray(svc_params, dtype=np.float64)
    cdef double[::1] iap = np.ascontiguousarray(ia_params, dtype=np.float64)
    cdef double[::1] rew = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] cost = np.ascontiguousarray(costs, dtype=np.float64)
    cdef double[::1] means = np.ascontiguousarray(svc_means, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef int m = codes.shape[0]
    cdef int k = m + 1
    cdef int ia_c = ia_code
    cdef long long capn = cap
    cdef long long hard = hard_limit
    cdef uint64_t state = stream.state

    wbuf = np.zeros(m, dtype=np.float64)
    cdef double[::1] w = wbuf
    cdef int i

    cdef Py_ssize_t size = 64
    rows = np.empty((size, k), dtype=np.float64)
    cdef double[:, ::1] rv = rows
    cdef Py_ssize_t j = 0
    cdef int status = STATUS_OK
    cdef bint empty
    cdef int a
    cdef double y, gap, acc, u

    while True:
        empty = True
        for i in range(m):
            if w[i] != 0.0:
                empty = False
                break
        if j > 0 and empty:
            break
        if capn > 0 and j >= capn:
            status = STATUS_TRUNCATED
            break
        if j >= hard:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, k), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
            rv = rows
        for i in range(m):
            rv[j, i] = rew[i] - cost[i] * (w[i] + means[i])
        rv[j, m] = 0.0
        j += 1

        u = _uniform(&state)
        a = _draw_action(&p[0], k, u)
        y = 0.0
        if a < m:
            y = _sample(&state, <int>codes[a], pars[a, 0], pars[a, 1],
                        pars[a, 2], pars[a, 3])
        gap = _sample(&state, ia_c, iap[0], iap[1], iap[2], iap[3])
        for i in range(m):
            acc = w[i]
            if i == a:
                acc = acc + y
            acc = acc - gap
            w[i] = acc if acc > 0.0 else 0.0

    stream.state = state
    return rows[:j].copy(), status


def simulate_sensing(svc_code, svc_params, ia_code, ia_params, sense_cost,
                     wait_cost, p_sense, svc_mean, busy_frac, cap,
                     hard_limit, stream):
    cdef double[::1] spar = np.ascontiguousarray(svc_params, dtype=np.float64)
    cdef double[::1] iap = np.ascontiguousarray(ia_params, dtype=np.float64)
    cdef int svc_c = svc_code
    cdef int ia_c = ia_code
    cdef double cs = sense_cost
    cdef double cw = wait_cost
    cdef double ps = p_sense
    cdef double mean_y = svc_mean
    cdef double bf = busy_frac
    cdef long long capn = cap
    cdef long long hard = hard_limit
    cdef uint64_t state = stream.state
    cdef double x1 = 0.0, x2 = 0.0

    cdef Py_ssize_t size = 64
    rows = np.empty((size, 2), dtype=np.float64)
    ctrl = np.empty((size, 3), dtype=np.float64)
    cdef double[:, ::1] rv = rows
    cdef double[:, ::1] cv = ctrl
    cdef Py_ssize_t j = 0
    cdef int status = STATUS_OK
    cdef double busy, sensed, y, gap, acc
    cdef bint to_first

    while True:
        if j > 0 and x1 == 0.0 and x2 == 0.0:
            break
        if capn > 0 and j >= capn:
            status = STATUS_TRUNCATED
            break
        if j >= hard:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, 2), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
            rv = rows
            bigger = np.empty((size, 3), dtype=np.float64)
            bigger[:j] = ctrl
            ctrl = bigger
            cv = ctrl
        busy = 1.0 if x1 > 0.0 else 0.0
        rv[j, 0] = -cs - cw * busy * x2
        rv[j, 1] = -cw * x2

        sensed = 1.0 if _uniform(&state) < ps else 0.0
        y = _sample(&state, svc_c, spar[0], spar[1], spar[2], spar[3])
        cv[j, 0] = sensed - ps
        cv[j, 1] = y - mean_y
        cv[j, 2] = busy - bf
        j += 1

        to_first = sensed == 1.0 and x1 == 0.0
        gap = _sample(&state, ia_c, iap[0], iap[1], iap[2], iap[3])
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

    stream.state = state
    return rows[:j].copy(), ctrl[:j].copy(), status


def simulate_observable(svc_code, svc_params, ia_code, ia_params, reward,
                        cost, svc_mean, threshold, behavior, cap,
                        hard_limit, stream):
    cdef double[::1] spar = np.ascontiguousarray(svc_params, dtype=np.float64)
    cdef double[::1] iap = np.ascontiguousarray(ia_params, dtype=np.float64)
    cdef double[:, ::1] beh = np.ascontiguousarray(behavior, dtype=np.float64)
    cdef int svc_c = svc_code
    cdef int ia_c = ia_code
    cdef double r = reward
    cdef double c = cost
    cdef double mean_y = svc_mean
    cdef int kk = threshold
    cdef long long capn = cap
    cdef long long hard = hard_limit
    cdef uint64_t state = stream.state

    ring_arr = np.zeros(kk + 3, dtype=np.float64)
    cdef double[::1] ring = ring_arr
    cdef int ring_n = kk + 3
    cdef int head = 0, tail = 0, count = 0
    cdef double last_dep = 0.0, t = 0.0

    cdef Py_ssize_t size = 64
    rows = np.empty((size, 2), dtype=np.float64)
    signals = np.empty(size, dtype=np.int64)
    cdef double[:, ::1] rv = rows
    cdef int64_t[::1] sv = signals
    cdef Py_ssize_t j = 0
    cdef long long arrivals = 0
    cdef int status = STATUS_OK
    cdef double y, start, dep

    while True:
        while count > 0 and ring[head] <= t:
            head = (head + 1) % ring_n
            count -= 1
        if count > kk:
            arrivals += 1
            if arrivals >= hard:
                status = STATUS_HARD_LIMIT
                break
            t = t + _sample(&state, ia_c, iap[0], iap[1], iap[2], iap[3])
            continue
        if j > 0 and count == 0:
            break
        if capn > 0 and j >= capn:
            status = STATUS_TRUNCATED
            break
        if arrivals >= hard:
            status = STATUS_HARD_LIMIT
            break
        if j == size:
            size *= 2
            bigger = np.empty((size, 2), dtype=np.float64)
            bigger[:j] = rows
            rows = bigger
            rv = rows
            bigger_i = np.empty(size, dtype=np.int64)
            bigger_i[:j] = signals
            signals = bigger_i
            sv = signals
        if count == 0:
            rv[j, 0] = r - c * mean_y
        else:
            rv[j, 0] = r - c * (count * mean_y + (ring[head] - t))
        rv[j, 1] = 0.0
        sv[j] = count
        j += 1
        arrivals += 1

        if _uniform(&state) < beh[count, 0]:
            y = _sample(&state, svc_c, spar[0], spar[1], spar[2], spar[3])
            start = last_dep if last_dep > t else t
            dep = start + y
            ring[tail] = dep
            tail = (tail + 1) % ring_n
            count += 1
            last_dep = dep
        t = t + _sample(&state, ia_c, iap[0], iap[1], iap[2], iap[3])

    stream.state = state
    return rows[:j].copy(), signals[:j].copy(), arrivals, status
