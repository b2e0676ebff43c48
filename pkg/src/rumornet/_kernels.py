"""Hot loops. Each kernel has a loop form (compiled by numba when enabled) and
a vectorized numpy form; both must return identical results."""
import numpy as np

from ._accel import USE_NUMBA, njit

# node states used by the cascade kernels
ORDINARY, SEED, SPREADER, INFECTED = 0, 1, 2, 3


@njit
def _cascade_loop(indptr, src, weight, thresholds, state, infected_transmit, max_iterations):
    n = state.shape[0]
    state = state.copy()
    exposure = np.zeros(n, dtype=np.int64)
    fractions = np.zeros(max_iterations + 1, dtype=np.float64)
    transmitting = np.zeros(n, dtype=np.bool_)
    newly = np.zeros(n, dtype=np.bool_)
    active = 0
    for u in range(n):
        if state[u] != ORDINARY:
            active += 1
    fractions[0] = active / n if n > 0 else 0.0
    it = 0
    converged = False
    while it < max_iterations:
        it += 1
        for u in range(n):
            s = state[u]
            transmitting[u] = s == SEED or s == SPREADER or (infected_transmit and s == INFECTED)
        flips = 0
        received = 0
        for u in range(n):
            newly[u] = False
            if state[u] != ORDINARY:
                continue
            acc = 0
            for j in range(indptr[u], indptr[u + 1]):
                if transmitting[src[j]]:
                    acc += weight[j]
            exposure[u] += acc
            received += acc
            if exposure[u] >= thresholds[u]:
                newly[u] = True
                flips += 1
        for u in range(n):
            if newly[u]:
                state[u] = INFECTED
        active += flips
        fractions[it] = active / n
        # fixed point: nothing flipped and no ordinary node is still accumulating
        if flips == 0 and received == 0:
            converged = True
            break
    return it, fractions[: it + 1].copy(), state, exposure, converged


def _cascade_numpy(indptr, src, weight, thresholds, state, infected_transmit, max_iterations):
    n = state.shape[0]
    state = state.copy()
    dst = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    exposure = np.zeros(n, dtype=np.int64)
    fractions = [float(np.count_nonzero(state != ORDINARY)) / n if n else 0.0]
    it = 0
    converged = False
    while it < max_iterations:
        it += 1
        transmitting = (state == SEED) | (state == SPREADER)
        if infected_transmit:
            transmitting |= state == INFECTED
        contrib = np.where(transmitting[src], weight, 0)
        incoming = np.bincount(dst, weights=contrib, minlength=n).astype(np.int64) if len(dst) else np.zeros(n, np.int64)
        ordinary = state == ORDINARY
        exposure[ordinary] += incoming[ordinary]
        newly = ordinary & (exposure >= thresholds)
        state[newly] = INFECTED
        fractions.append(float(np.count_nonzero(state != ORDINARY)) / n)
        if not newly.any() and not incoming[ordinary].any():
            converged = True
            break
    return it, np.asarray(fractions), state, exposure, converged


def run_cascade_kernel(indptr, src, weight, thresholds, state, infected_transmit=True,
                       max_iterations=1000, use_numba=None):
    """Synchronous cumulative-exposure threshold cascade over in-edge CSR arrays."""
    if use_numba is None:
        use_numba = USE_NUMBA
    fn = _cascade_loop if use_numba else _cascade_numpy
    return fn(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(src, dtype=np.int64),
        np.ascontiguousarray(weight, dtype=np.int64),
        np.ascontiguousarray(thresholds, dtype=np.int64),
        np.ascontiguousarray(state, dtype=np.int8),
        bool(infected_transmit),
        int(max_iterations),
    )


@njit
def _curve_loop(exposures, first_share, k_max):
    n_k = np.zeros(k_max + 1, dtype=np.int64)
    hits = np.zeros(k_max + 1, dtype=np.int64)
    for i in range(exposures.shape[0]):
        e = exposures[i]
        t = first_share[i]
        top = e if e < k_max else k_max
        for k in range(top + 1):
            n_k[k] += 1
            if t >= 0 and t <= k:
                hits[k] += 1
    return n_k, hits


def _curve_numpy(exposures, first_share, k_max):
    e = np.minimum(exposures, k_max)
    # users with E_u >= k for each k: reverse cumulative count of min(E_u, k_max)
    n_k = np.cumsum(np.bincount(e, minlength=k_max + 1)[::-1])[::-1].astype(np.int64)
    # a sharer contributes to every k in [T_u, min(E_u, k_max)]
    shared = (first_share >= 0) & (first_share <= e)
    diff = np.zeros(k_max + 2, dtype=np.int64)
    np.add.at(diff, first_share[shared], 1)
    np.add.at(diff, e[shared] + 1, -1)
    hits = np.cumsum(diff)[: k_max + 1]
    return n_k, hits


def sharing_counts(exposures, first_share, k_max, use_numba=None):
    """Per-k denominators ``|{E_u >= k}|`` and numerators ``|{E_u >= k, T_u <= k}|``.

    ``first_share`` uses -1 for users who never share.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    exposures = np.ascontiguousarray(exposures, dtype=np.int64)
    first_share = np.ascontiguousarray(first_share, dtype=np.int64)
    fn = _curve_loop if use_numba else _curve_numpy
    return fn(exposures, first_share, int(k_max))
