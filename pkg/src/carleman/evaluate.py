"""Closed-form derivatives of bricks, of S and of f(x) = 2 S(2x).

    d^p/dx^p  A / (2^n (z - x))  =  p! A 2^(-n) (z - x)^(-(p+1))

evaluated as LogComplex so that orders p ~ 1e7 stay representable.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import gmpy2
from gmpy2 import mpc, mpfr

from carleman._numeric import (LogComplex, current_prec, dec, log_sum, to_mpfr, workprec,
                               wrap_phase)
from carleman.construction import Brick, CounterexampleFn
from carleman.errors import PrecisionOverflow
from carleman.formal import TruncatedSeries, inversion_diagnostics


def log_factorial(p):
    return gmpy2.lgamma(p + 1)[0]


def brick_derivative(B: Brick, p, x) -> LogComplex:
    """p-th derivative of A / (2^n (z - x)) at real x."""
    if p < 0:
        raise ValueError("order must be >= 0")
    with workprec(max(current_prec(), B.log_A.precision)):
        x = to_mpfr(x)
        w = mpc(B.x - x, B.y)
        log_mag = (log_factorial(p) + B.log_A - B.n * gmpy2.log(2)
                   - (p + 1) * gmpy2.log(abs(w)))
        return LogComplex(log_mag, wrap_phase(-(p + 1) * gmpy2.phase(w)))


def s_derivative(F: CounterexampleFn, p, x) -> LogComplex:
    """S^(p)(x), summed in descending magnitude."""
    with workprec(F.prec):
        return log_sum([brick_derivative(b, p, x) for b in F.bricks])


def f_derivative(F: CounterexampleFn, p, x) -> LogComplex:
    """f^(p)(x) = 2^(p+1) S^(p)(2x)."""
    with workprec(F.prec):
        x = to_mpfr(x)
        return s_derivative(F, p, 2 * x).scale_log((p + 1) * gmpy2.log(2))


def extension_tail_bound(F: CounterexampleFn, p, J_from):
    """log of sum_{t >= J_from} p! 2^(-n_t) m~_p over any continuation with gaps >= 3.

    Uses sum_{t >= J_from} 2^(-n_t) <= 2^(1 - n_{J_from}), with
    n_{J+1} := n_J + 3 when J_from = J + 1.
    """
    if not 0 <= J_from <= F.J + 1:
        raise ValueError("J_from must lie in [0, J+1]")
    n_from = F.subseq[J_from] if J_from <= F.J else F.subseq[-1] + 3
    with workprec(F.prec):
        return log_factorial(p) + F.mt.log_m(p) + (1 - n_from) * gmpy2.log(2)


def taylor_coeffs(F: CounterexampleFn, P, prec=None) -> TruncatedSeries:
    """Coefficients c_p = 2^(p+1) sum_t A_t 2^(-n_t) z_t^(-(p+1)) of the Taylor series of f at 0.

    ``prec`` above the build precision treats the stored brick values as exact.
    """
    if P < 0:
        raise ValueError("order must be >= 0")
    with workprec(prec or F.prec):
        ctx = gmpy2.get_context()
        limit = (ctx.emax - 64) * gmpy2.log(2)
        coeffs = []
        for p in range(P + 1):
            terms = []
            for b in F.bricks:
                z = b.z
                lm = b.log_A - b.n * gmpy2.log(2) - (p + 1) * gmpy2.log(abs(z))
                terms.append(LogComplex(lm, wrap_phase(-(p + 1) * gmpy2.phase(z))))
            s = log_sum(terms).scale_log((p + 1) * gmpy2.log(2))
            if not s.is_zero and abs(s.log_mag) > limit:
                raise PrecisionOverflow(f"coefficient {p} has log-magnitude {float(s.log_mag):.4g}")
            coeffs.append(s.to_complex())
        return TruncatedSeries(coeffs, var="t")


def prepare_taylor(F: CounterexampleFn, P, tol, cap=4096, lagrange_order=30):
    """Taylor series of f to order P with its preparation witness and cross-checks.

    Inverting a steep series cancels heavily, so the precision doubles from
    the build precision until every cross-check is within ``tol`` or ``cap``
    is reached.  Returns ``(series, witness, errors, precision)``.
    """
    prec = F.prec
    tol = to_mpfr(tol)
    while True:
        with workprec(prec):
            T = taylor_coeffs(F, P, prec=prec)
            w, errors = inversion_diagnostics(T, P, lagrange_order)
            if max(errors.values()) <= tol or prec * 2 > cap:
                return T, w, errors, prec
        prec *= 2


def global_bound_log(F: CounterexampleFn, p):
    """log(p! 2^(p+1) m~_p)."""
    with workprec(F.prec):
        return log_factorial(p) + (p + 1) * gmpy2.log(2) + F.mt.log_m(p)


def halfline_bound_log(F: CounterexampleFn, p):
    """log(p! 2^(p+1) m_p)."""
    with workprec(F.prec):
        return log_factorial(p) + (p + 1) * gmpy2.log(2) + F.m.log_m(p)


def sweep_grid(F: CounterexampleFn, per_brick=9, span=4):
    """x-grid: log-spaced points around each x_n/2 (both sides of 0) plus 0 and endpoints."""
    with workprec(F.prec):
        pts = {mpfr(0), mpfr(-1), mpfr(1)}
        for b in F.bricks:
            c = abs(b.x) / 2
            for i in range(per_brick):
                s = span * (2 * mpfr(i) / (per_brick - 1) - 1) if per_brick > 1 else mpfr(0)
                pts.add(-c * gmpy2.exp2(s))
                pts.add(c * gmpy2.exp2(s))
        return sorted(pts)


def derivative_sweep(F: CounterexampleFn, orders, xs, workers=1):
    """Rows (p, x, log|f^(p)(x)|, log global bound, slack) in (p, x) order.

    Evaluation may fan out over threads; the row order is fixed by the
    inputs, not by completion order.
    """
    jobs = [(p, x) for p in orders for x in xs]

    def one(job):
        p, x = job
        with workprec(F.prec):
            v = f_derivative(F, p, x)
            bound = global_bound_log(F, p)
            return (p, x, v.log_mag, bound, bound - v.log_mag)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, jobs))
    return [one(j) for j in jobs]


def sweep_csv_rows(rows):
    yield ["p", "x", "log_mag", "bound_log_mag", "slack"]
    for p, x, lm, bd, sl in rows:
        yield [p, dec(x), dec(lm), dec(bd), dec(sl)]


__all__ = ["brick_derivative", "s_derivative", "f_derivative", "extension_tail_bound",
           "taylor_coeffs", "global_bound_log", "halfline_bound_log", "sweep_grid",
           "derivative_sweep", "sweep_csv_rows", "log_factorial", "prepare_taylor"]
