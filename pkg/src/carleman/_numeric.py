"""High-precision helpers on top of gmpy2 (MPFR/MPC).

All library code runs inside ``workprec(bits)``; values are ``mpfr``/``mpc``.
``LogComplex`` carries complex numbers whose magnitudes (p! times a growth
term with p ~ 1e7) are only representable through their logarithm.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PREC = int(os.environ.get("CARLEMAN_PRECISION", "256"))
MIN_PREC = 64


def workprec(bits):
    """Context manager setting the MPFR working precision (round-to-nearest)."""
    return gmpy2.context(precision=int(bits))


def current_prec():
    return gmpy2.get_context().precision


def to_mpfr(value):
    """Convert a number, decimal string, ``"p/q"`` string or ``"e"`` to mpfr.

    Rounds to the current context precision.
    """
    if isinstance(value, str):
        s = value.strip()
        if s == "e":
            return gmpy2.exp(1)
        if s == "pi":
            return gmpy2.const_pi()
        if "/" in s:
            return mpfr(gmpy2.mpq(s))
        return mpfr(s)
    if isinstance(value, Fraction):
        return mpfr(gmpy2.mpq(value.numerator, value.denominator))
    if isinstance(value, gmpy2.mpq):
        return mpfr(value)
    return +mpfr(value)


def to_mpc(value):
    if isinstance(value, (list, tuple)):
        return mpc(to_mpfr(value[0]), to_mpfr(value[1]))
    if isinstance(value, complex):
        return mpc(value)
    if isinstance(value, type(mpc(0))):
        return +value
    return mpc(to_mpfr(value), 0)


def dec(x, digits=None):
    """Decimal string of an mpfr at full precision (``d.ddd...e±N``)."""
    x = mpfr(x) if not isinstance(x, type(mpfr(0))) else x
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    if digits is None:
        digits = int(math.ceil(x.precision * math.log10(2))) + 1
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    head, tail = mant[0], mant[1:].rstrip("0")
    body = f"{head}.{tail}" if tail else head
    return f"{sign}{body}e{exp - 1:+d}"


def dec_complex(z, digits=None):
    return [dec(z.real, digits), dec(z.imag, digits)]


def wrap_phase(theta):
    """Reduce an angle to (-pi, pi]."""
    two_pi = 2 * gmpy2.const_pi()
    t = gmpy2.fmod(theta, two_pi)
    if t > gmpy2.const_pi():
        t -= two_pi
    elif t <= -gmpy2.const_pi():
        t += two_pi
    return t


NEG_INF = mpfr("-inf")


@dataclass(frozen=True)
class LogComplex:
    """Complex number stored as (log|z|, arg z); zero is ``log_mag == -inf``."""

    log_mag: object
    phase: object

    @classmethod
    def zero(cls):
        return cls(mpfr("-inf"), mpfr(0))

    @classmethod
    def from_complex(cls, z):
        z = to_mpc(z)
        if z == 0:
            return cls.zero()
        return cls(gmpy2.log(abs(z)), gmpy2.phase(z))

    @property
    def is_zero(self):
        return gmpy2.is_infinite(self.log_mag) and self.log_mag < 0

    def to_complex(self):
        if self.is_zero:
            return mpc(0)
        r = gmpy2.exp(self.log_mag)
        return mpc(r * gmpy2.cos(self.phase), r * gmpy2.sin(self.phase))

    def __mul__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag,
                          wrap_phase(self.phase + other.phase))

    __rmul__ = __mul__

    def scale_log(self, log_factor):
        """Multiply by the positive real ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogComplex(self.log_mag + log_factor, self.phase)

    def __add__(self, other):
        return log_sum([self, other])

    def __neg__(self):
        if self.is_zero:
            return self
        return LogComplex(self.log_mag, wrap_phase(self.phase + gmpy2.const_pi()))


def log_sum(values):
    """Sum LogComplex values: largest factored out, remainder summed with fsum.

    Terms are ordered by descending magnitude (ties keep input order) so the
    result does not depend on the order the caller produced them in.
    """
    terms = [(i, v) for i, v in enumerate(values) if not v.is_zero]
    if not terms:
        return LogComplex.zero()
    terms.sort(key=lambda iv: (-iv[1].log_mag, iv[0]))
    top = terms[0][1]
    if len(terms) == 1:
        return top
    re_parts, im_parts = [], []
    for _, v in terms:
        rho = gmpy2.exp(v.log_mag - top.log_mag)
        d = v.phase - top.phase
        re_parts.append(rho * gmpy2.cos(d))
        im_parts.append(rho * gmpy2.sin(d))
    w = mpc(gmpy2.fsum(re_parts), gmpy2.fsum(im_parts))
    if w == 0:
        return LogComplex.zero()
    return LogComplex(top.log_mag + gmpy2.log(abs(w)),
                      wrap_phase(top.phase + gmpy2.phase(w)))
