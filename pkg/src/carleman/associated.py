"""The associated function phi(xi) = sup_t xi^(t+1) / m_t and its inverse.

With integer t and b_0 = 0, phi is piecewise monomial: on (b_n, b_{n+1}]
it equals xi^(n+1) / m_n.  A point sitting exactly on a breakpoint b_n is
assigned to the lower segment n - 1; both formulas agree there.
"""
from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from carleman._numeric import to_mpfr, workprec
from carleman.errors import PhiDivergent, PhiRange
from carleman.sequences import GrowthSequence


class AssociatedFunction:
    def __init__(self, seq: GrowthSequence):
        self.seq = seq
        self.prec = seq.prec

    def segment(self, xi):
        """Segment index n with b_n < xi <= b_{n+1}."""
        with workprec(self.prec):
            xi = to_mpfr(xi)
            if not xi > 0:
                raise ValueError("xi must be positive")
            j = self.seq.first_index(lambda t: t.ratio >= xi)
        if j is None:
            raise PhiDivergent(f"b_n <= {xi:.6g} for every n up to the horizon {self.seq.horizon}")
        return j - 1

    def segment_value(self, n, log_xi):
        """log of xi^(n+1)/m_n."""
        with workprec(self.prec):
            return (n + 1) * log_xi - self.seq.log_m(n)

    def log_phi(self, xi):
        """log phi(xi)."""
        with workprec(self.prec):
            xi = to_mpfr(xi)
            n = self.segment(xi)
            return self.segment_value(n, gmpy2.log(xi))

    def inverse_segment(self, v):
        """Segment n with log phi(b_n) < v <= log phi(b_{n+1})."""
        with workprec(self.prec):
            v = to_mpfr(v)
            if not gmpy2.is_finite(v):
                raise PhiRange(f"log-value {v} outside the range of phi")
            # log phi(b_j) = (j+1) log b_j - log m_j is non-decreasing in j
            j = self.seq.first_index(lambda t: (t.n + 1) * t.log_ratio - t.log_m >= v)
        if j is None:
            raise PhiRange(f"log-value {v:.6g} above phi(b_horizon), horizon {self.seq.horizon}")
        return j - 1

    def log_phi_inv(self, v):
        """log xi with log phi(xi) = v, from the closed-form segment equation."""
        with workprec(self.prec):
            v = to_mpfr(v)
            n = self.inverse_segment(v)
            return (v + self.seq.log_m(n)) / (n + 1)

    def phi_inv(self, v):
        with workprec(self.prec):
            return gmpy2.exp(self.log_phi_inv(v))

    def brute_force(self, xi, t_max):
        """max over 0 <= t <= t_max of (t+1) log xi - log m_t."""
        with workprec(self.prec):
            lx = gmpy2.log(to_mpfr(xi))
            best = mpfr("-inf")
            for t in range(t_max + 1):
                val = (t + 1) * lx - self.seq.log_m(t)
                if val > best:
                    best = val
            return best


def phi_eval(A, xi):
    """log phi(xi) for an AssociatedFunction or a GrowthSequence."""
    if isinstance(A, GrowthSequence):
        A = AssociatedFunction(A)
    return A.log_phi(xi)


def phi_inv(A, v):
    """xi with log phi(xi) = v."""
    if isinstance(A, GrowthSequence):
        A = AssociatedFunction(A)
    return A.phi_inv(v)


__all__ = ["AssociatedFunction", "phi_eval", "phi_inv"]
