"""Independent reference computations.

Nothing here imports the package: sequences are recomputed with mpmath,
rationals with Fraction, complex sums with Python complex, and the long
subsequence recursion with float64 numpy scans.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np

mp = mpmath.mp


def log_m_direct(ratio, n, dps=80):
    """log(prod_{j<=n} ratio(j)) with mpmath, multiplying first then one log."""
    with mpmath.workdps(dps):
        prod = mpmath.mpf(1)
        for j in range(1, n + 1):
            prod *= ratio(j)
        return mpmath.log(prod)


def log_ratio_family(shift=None):
    with mpmath.workdps(80):
        e = mpmath.e if shift is None else mpmath.mpf(shift)
    return lambda j: mpmath.log(j + e)


def widened_ratios(ratio, n, dps=80):
    """beta_j, mu_j for j = 1..n (lists indexed from 1)."""
    with mpmath.workdps(dps):
        mu, mus, betas = mpmath.mpf(0), [None], [None]
        for k in range(1, n + 1):
            a = ratio(k)
            mu += 1 / (k * a)
            mus.append(mu)
            betas.append(a * mpmath.sqrt(mu))
        return betas, mus


def phi_brute(log_m, xi, t_max, dps=80):
    """max_{0<=t<=t_max} (t+1) log xi - log m_t."""
    with mpmath.workdps(dps):
        lx = mpmath.log(xi)
        return max((t + 1) * lx - log_m(t) for t in range(t_max + 1))


def constant_widening(n):
    """Exact mu_j (Fraction) for m = 1: mu_j = H_j."""
    return [Fraction(0)] + [sum(Fraction(1, k) for k in range(1, j + 1)) for j in range(1, n + 1)]


def catalan_signed(n):
    """Coefficients of the inverse of t + t^2: (-1)^(k-1) C_{k-1}."""
    return [0] + [(-1) ** (k - 1) * math.comb(2 * (k - 1), k - 1) // k for k in range(1, n + 1)]


def taylor_complex(bricks, P):
    """c_p = 2^(p+1) sum A 2^(-n) z^(-(p+1)) in ordinary complex arithmetic.

    ``bricks`` is a list of (n, A, x, y) floats.
    """
    out = []
    for p in range(P + 1):
        s = 0j
        for n, A, x, y in bricks:
            s += A * 2.0 ** (-n) * complex(x, y) ** (-(p + 1))
        out.append(2.0 ** (p + 1) * s)
    return out


def taylor_mp(bricks, P, dps=60):
    """Same sum in mpmath complex arithmetic; bricks hold decimal strings."""
    with mpmath.workdps(dps):
        parsed = [(n, mpmath.mpf(A), mpmath.mpc(mpmath.mpf(x), mpmath.mpf(y)))
                  for n, A, x, y in bricks]
        return [2 ** (p + 1) * mpmath.fsum(A * mpmath.mpf(2) ** (-n) * z ** (-(p + 1))
                                           for n, A, z in parsed)
                for p in range(P + 1)]


def brick_fd(n, A, x0, y, p, x, h=1e-5):
    """p-th derivative of A/(2^n (z - x)) by central differences (mpmath.diff)."""
    with mpmath.workdps(60):
        z = mpmath.mpc(x0, y)
        return complex(mpmath.diff(lambda u: A / (2 ** n * (z - u)), x, p, h=h))


def subsequence_float(b, J, n_start=1):
    """Recursion N' = min{k : b(k) > 4 b(n+1)}, n_j = max(2N'+1, n+3) on a float table b."""
    idx = [n_start]
    for _ in range(J):
        prev = idx[-1]
        thr = 4 * b[prev + 1]
        k = prev + 1
        while b[k] <= thr:
            k += 1
        idx.append(max(2 * k + 1, prev + 3))
    return idx


def widened_log_scan(threshold_index, chunk=10_000_000, limit=40_000_000):
    """Stream beta_k = log(k+e) sqrt(mu_k) in float64 chunks.

    Returns (b(threshold_index), first k with beta_k > 4 b(threshold_index),
    beta at that k, beta at k - 1) so callers can see the decision margin.
    """
    mu = 0.0
    target = None
    prev_beta = None
    start = 1
    while start <= limit:
        k = np.arange(start, start + chunk, dtype=np.float64)
        a = np.log(k + math.e)
        mus = mu + np.cumsum(1.0 / (k * a))
        beta = a * np.sqrt(mus)
        if target is None and threshold_index < start + chunk:
            target = 4 * beta[threshold_index - start]
        if target is not None:
            hits = np.nonzero(beta > target)[0]
            hits = hits[k[hits] > threshold_index]
            if hits.size:
                i = int(hits[0])
                before = beta[i - 1] if i > 0 else prev_beta
                return target / 4, int(k[i]), float(beta[i]), float(before)
        mu = float(mus[-1])
        prev_beta = float(beta[-1])
        start += chunk
    return target, None, None, None


def log_sum_complex(values):
    return cmath.log(sum(values))
