"""Block scans of widening chains: compiled kernel with a pure-Python fallback.

A chain is a closed-form base family (constant, factorial or log ratio) with
``depth`` widenings on top.  A scan walks ``nblocks * stride`` consecutive
indices and returns, per block and per level, the increments of
``log m``, ``mu`` and ``sum(log mu)``.  Long horizons (tens of millions of
terms) are only practical through the compiled kernel, which accumulates in
quad precision; the fallback runs at the MPFR working precision.

Set ``CARLEMAN_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import gmpy2
from gmpy2 import mpfr

KINDS = {"constant": 0, "factorial": 1, "log": 2}

_compiled = None
if not os.environ.get("CARLEMAN_PURE_PYTHON"):
    try:
        from carleman import _scankernel as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def _split(x):
    hi = float(x)
    return hi, float(mpfr(x) - hi)


def _base_ratio(kind, param, k):
    if kind == 0:
        return param
    if kind == 1:
        return param * k
    return gmpy2.log(k + param)


def scan_python(kind, param, depth, k0, stride, nblocks, mu0):
    mu = [None] + [mpfr(m) for m in mu0]
    rows = []
    k = k0
    for _ in range(nblocks):
        dl = [mpfr(0)] * (depth + 1)
        dmu = [mpfr(0)] * (depth + 1)
        ds = [mpfr(0)] * (depth + 1)
        for _ in range(stride):
            r = _base_ratio(kind, param, k)
            if not r > 0:
                raise ValueError("non-positive ratio")
            dl[0] += gmpy2.log(r)
            for i in range(1, depth + 1):
                w = 1 / (k * r)
                mu[i] += w
                dmu[i] += w
                ds[i] += gmpy2.log(mu[i])
                r = r * gmpy2.sqrt(mu[i])
                dl[i] += gmpy2.log(r)
            k += 1
        rows.append([(dl[i], dmu[i], ds[i]) for i in range(depth + 1)])
    return rows


def scan(kind, param, depth, k0, stride, nblocks, mu0, backend=None):
    """Scan ``nblocks`` blocks starting at index ``k0``.

    ``mu0`` lists mu_1..mu_depth at index ``k0 - 1``.  Returns one list per
    block of ``(dlog_m, dmu, dsum_log_mu)`` triples (mpfr), one per level.
    """
    backend = backend or BACKEND
    if isinstance(kind, str):
        kind = KINDS[kind]
    if backend == "python":
        return scan_python(kind, param, depth, k0, stride, nblocks, mu0)
    if _compiled is None:
        raise RuntimeError("compiled scan kernel is not available")
    if depth > _compiled.MAX_DEPTH:
        return scan_python(kind, param, depth, k0, stride, nblocks, mu0)
    p_hi, p_lo = _split(param)
    flat = []
    for m in mu0:
        flat.extend(_split(m))
    raw = _compiled.scan_blocks(kind, p_hi, p_lo, depth, k0, stride, nblocks, flat)
    rows = []
    for row in raw:
        levels = []
        for i in range(depth + 1):
            c = row[6 * i:6 * i + 6]
            levels.append((mpfr(c[0]) + mpfr(c[1]),
                           mpfr(c[2]) + mpfr(c[3]),
                           mpfr(c[4]) + mpfr(c[5])))
        rows.append(levels)
    return rows
