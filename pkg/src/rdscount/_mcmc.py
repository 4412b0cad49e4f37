"""Numba kernels for the edge-toggle Metropolis chain.

The RNG is a self-contained splitmix64 stream so that chains are
bit-reproducible for a given 64-bit seed, independent of numpy/numba
global state.  State is carried in a one-element uint64 array so a chain
can be advanced across several kernel calls.
"""

import numpy as np
from numba import njit, uint64

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_INV_2_64 = 1.0 / 18446744073709551616.0


@njit(cache=True, inline="always")
def _splitmix64(s):
    s = s + _GOLDEN
    z = s
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    z = z ^ (z >> uint64(31))
    return s, z


@njit(cache=True, inline="always")
def _rand_uniform(s):
    s, z = _splitmix64(s)
    # (z + 1) / 2^64 lies in (0, 1]; log() of it is finite
    return s, (float(z) + 1.0) * _INV_2_64


@njit(cache=True, inline="always")
def _rand_below(s, n):
    s, z = _splitmix64(s)
    return s, int(z % uint64(n))


@njit(cache=True)
def toggle_logodds(adj, deg, i, j, base, node_static, match_codes, match_theta, degtheta):
    """Log odds of toggling dyad (i, j) from its current state.

    Equals theta . (s(g+ij) - s(g-ij)) when the edge is absent and the
    negation when present; degrees are evaluated in the edge-absent state.
    """
    if adj[i, j]:
        di = deg[i] - 1
        dj = deg[j] - 1
        sign = -1.0
    else:
        di = deg[i]
        dj = deg[j]
        sign = 1.0
    lo = base + node_static[i] + node_static[j]
    for m in range(match_theta.shape[0]):
        if match_codes[m, i] == match_codes[m, j]:
            lo += match_theta[m]
    lo += degtheta[di + 1] - degtheta[di]
    lo += degtheta[dj + 1] - degtheta[dj]
    return sign * lo


@njit(cache=True)
def metropolis_steps(adj, deg, base, node_static, match_codes, match_theta,
                     degtheta, steps, rng_state):
    """Advance the chain by ``steps`` uniform-dyad toggle proposals in place."""
    n = adj.shape[0]
    s = rng_state[0]
    for _ in range(steps):
        s, i = _rand_below(s, n)
        s, j = _rand_below(s, n)
        while j == i:
            s, j = _rand_below(s, n)
        if adj[i, j]:
            di = deg[i] - 1
            dj = deg[j] - 1
            lo = base + node_static[i] + node_static[j]
            for m in range(match_theta.shape[0]):
                if match_codes[m, i] == match_codes[m, j]:
                    lo += match_theta[m]
            lo += degtheta[di + 1] - degtheta[di]
            lo += degtheta[dj + 1] - degtheta[dj]
            lo = -lo
        else:
            di = deg[i]
            dj = deg[j]
            lo = base + node_static[i] + node_static[j]
            for m in range(match_theta.shape[0]):
                if match_codes[m, i] == match_codes[m, j]:
                    lo += match_theta[m]
            lo += degtheta[di + 1] - degtheta[di]
            lo += degtheta[dj + 1] - degtheta[dj]
        accept = lo >= 0.0
        if not accept:
            s, u = _rand_uniform(s)
            accept = np.log(u) < lo
        if accept:
            if adj[i, j]:
                adj[i, j] = 0
                adj[j, i] = 0
                deg[i] -= 1
                deg[j] -= 1
            else:
                adj[i, j] = 1
                adj[j, i] = 1
                deg[i] += 1
                deg[j] += 1
    rng_state[0] = s


@njit(cache=True)
def tree_resample(seed_positions, child_offsets, children, n_seeds_out,
                  rng_state, orig_idx, recruiter_pos, wave, max_out):
    """Chain-respecting resample: seeds with replacement, then each copy's
    recruits with replacement from the original recruit set.

    Returns the number of output respondents, or -1 if the buffer of
    ``max_out`` slots overflowed (caller retries with a larger buffer).
    """
    s = rng_state[0]
    n_seeds = seed_positions.shape[0]
    m = 0
    for k in range(n_seeds_out):
        s, r = _rand_below(s, n_seeds)
        if m >= max_out:
            rng_state[0] = s
            return -1
        orig_idx[m] = seed_positions[r]
        recruiter_pos[m] = -1
        wave[m] = 0
        m += 1
    head = 0
    while head < m:
        src = orig_idx[head]
        lo = child_offsets[src]
        hi = child_offsets[src + 1]
        n_children = hi - lo
        for _ in range(n_children):
            s, r = _rand_below(s, n_children)
            if m >= max_out:
                rng_state[0] = s
                return -1
            orig_idx[m] = children[lo + r]
            recruiter_pos[m] = head
            wave[m] = wave[head] + 1
            m += 1
        head += 1
    rng_state[0] = s
    return m
