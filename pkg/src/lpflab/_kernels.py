"""Compiled inner loops for the sieve.

Everything here works on plain numpy arrays so the public modules can stay
free of numba types.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def linear_sieve(limit):
    spf = np.zeros(limit + 1, dtype=np.uint32)
    if limit >= 1:
        spf[1] = 1
    cap = int(1.26 * limit / max(np.log(max(limit, 3)), 1.0)) + 64
    primes = np.empty(cap, dtype=np.int64)
    count = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[count] = i
            count += 1
        si = np.int64(spf[i])
        for j in range(count):
            p = primes[j]
            if p > si or p * i > limit:
                break
            spf[p * i] = p
    return spf, primes[:count].copy()


@njit(cache=True)
def derive_profiles(spf):
    """Fill every per-n arithmetic array by one increasing pass.

    For n >= 2 with p = spf[n] and m = n // p every quantity of n follows from
    the already-computed quantities of m < n.
    """
    size = spf.shape[0]
    big_omega = np.zeros(size, dtype=np.uint8)
    small_omega = np.zeros(size, dtype=np.uint8)
    omega1 = np.zeros(size, dtype=np.uint8)
    pmax = np.zeros(size, dtype=np.uint32)
    phi = np.zeros(size, dtype=np.uint32)
    mu = np.zeros(size, dtype=np.int8)
    spf_exp = np.zeros(size, dtype=np.uint8)
    pmax_exp = np.zeros(size, dtype=np.uint8)
    if size > 1:
        pmax[1] = 1
        phi[1] = 1
        mu[1] = 1
    for n in range(2, size):
        p = np.int64(spf[n])
        m = n // p
        big_omega[n] = big_omega[m] + 1
        if m > 1 and spf[m] == p:
            small_omega[n] = small_omega[m]
            phi[n] = phi[m] * p
            mu[n] = 0
            spf_exp[n] = spf_exp[m] + 1
            omega1[n] = omega1[m] - 1 if spf_exp[m] == 1 else omega1[m]
        else:
            small_omega[n] = small_omega[m] + 1
            phi[n] = phi[m] * (p - 1)
            mu[n] = -mu[m]
            spf_exp[n] = 1
            omega1[n] = omega1[m] + 1
        if m == 1:
            pmax[n] = p
            pmax_exp[n] = 1
        elif pmax[m] == p:
            # n is a power of p
            pmax[n] = p
            pmax_exp[n] = pmax_exp[m] + 1
        else:
            pmax[n] = pmax[m]
            pmax_exp[n] = pmax_exp[m]
    return big_omega, small_omega, omega1, pmax, phi, mu, spf_exp, pmax_exp


@njit(cache=True)
def multiplicative_values(spf, spf_exp, prime_power_table):
    """f(n) = f(n / p^e) * f(p^e) with p = spf[n]; f(p^e) depends only on e."""
    size = spf.shape[0]
    out = np.zeros(size, dtype=np.float64)
    if size > 1:
        out[1] = 1.0
    for n in range(2, size):
        p = np.int64(spf[n])
        e = spf_exp[n]
        c = n
        for _ in range(e):
            c //= p
        out[n] = out[c] * prime_power_table[e]
    return out


@njit(cache=True)
def segment_profiles(lo, hi, base_primes, prime_power_table):
    """Factor every n in [lo, hi) by dividing out the base primes.

    base_primes must contain every prime p with p * p < hi.
    """
    size = hi - lo
    rem = np.empty(size, dtype=np.int64)
    for i in range(size):
        rem[i] = lo + i
    big_omega = np.zeros(size, dtype=np.uint8)
    small_omega = np.zeros(size, dtype=np.uint8)
    omega1 = np.zeros(size, dtype=np.uint8)
    pmax = np.ones(size, dtype=np.uint32)
    phi = rem.copy()
    mu = np.ones(size, dtype=np.int8)
    spf = np.zeros(size, dtype=np.uint32)
    pmax_exp = np.zeros(size, dtype=np.uint8)
    weight = np.ones(size, dtype=np.float64)
    for k in range(base_primes.shape[0]):
        p = base_primes[k]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        for v in range(start, hi, p):
            i = v - lo
            e = 0
            r = rem[i]
            while r % p == 0:
                r //= p
                e += 1
            rem[i] = r
            big_omega[i] += e
            small_omega[i] += 1
            if e == 1:
                omega1[i] += 1
                mu[i] = -mu[i]
            else:
                mu[i] = 0
            pmax[i] = p
            pmax_exp[i] = e
            phi[i] = phi[i] // p * (p - 1)
            if spf[i] == 0:
                spf[i] = p
            weight[i] *= prime_power_table[e]
    for i in range(size):
        r = rem[i]
        if r > 1:
            big_omega[i] += 1
            small_omega[i] += 1
            omega1[i] += 1
            mu[i] = -mu[i]
            pmax[i] = r
            pmax_exp[i] = 1
            phi[i] = phi[i] // r * (r - 1)
            if spf[i] == 0:
                spf[i] = r
            weight[i] *= prime_power_table[1]
        elif lo + i == 1:
            spf[i] = 1
    return big_omega, small_omega, omega1, pmax, phi, mu, spf, pmax_exp, weight


@njit(cache=True)
def rho_window_sweep(nodes, values, cellint, start_cell, m, h, alpha, xg, wg, M):
    """Advance rho cell by cell using u rho(u) = alpha * int_{u-1}^{u} rho.

    Every term is positive, so relative accuracy survives for large u.  The
    node values of cell i solve a small linear system because the window
    reaches into cell i itself.
    """
    Q = xg.shape[0]
    n_cells = nodes.shape[0]
    Mc = np.empty((Q, Q))
    for q in range(Q):
        for r in range(Q):
            Mc[q, r] = wg[r] - M[q, r]
    A = np.empty((Q, Q))
    b = np.empty(Q)
    for i in range(start_cell, n_cells):
        left = i * h
        s = 0.0
        for j in range(i - m + 1, i):
            s += cellint[j]
        d = i - m
        for q in range(Q):
            t = left + 0.5 * h * (1.0 + xg[q])
            part = 0.0
            for r in range(Q):
                part += Mc[q, r] * nodes[d, r]
                A[q, r] = -alpha * 0.5 * h * M[q, r]
            A[q, q] += t
            b[q] = alpha * (s + 0.5 * h * part)
        sol = np.linalg.solve(A, b)
        ci = 0.0
        for r in range(Q):
            nodes[i, r] = sol[r]
            ci += wg[r] * sol[r]
        cellint[i] = 0.5 * h * ci
        values[i + 1] = alpha * (s + cellint[i]) / ((i + 1) * h)


@njit(cache=True)
def compensated_bincount(keys, weights, mask, size):
    """Per-key sums of ``weights`` over entries with ``mask`` set, with
    Neumaier compensation; also flags which keys occur under the mask."""
    total = np.zeros(size)
    comp = np.zeros(size)
    present = np.zeros(size, dtype=np.bool_)
    for i in range(keys.shape[0]):
        if not mask[i]:
            continue
        k = keys[i]
        present[k] = True
        v = weights[i]
        s = total[k] + v
        if abs(total[k]) >= abs(v):
            comp[k] += (total[k] - s) + v
        else:
            comp[k] += (v - s) + total[k]
        total[k] = s
    return total + comp, present
