"""Truncated formal power series over high-precision complex numbers.

Covers composition, compositional inversion (three independent routes) and
the preparation witness for g(t, x) = F(t^2) - x = (t^2 - a(x)) Q(t, x),
where a is the compositional inverse of F.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from carleman._numeric import dec, dec_complex, to_mpc
from carleman.errors import CompositionConstantTerm, NotInvertible


def _zero():
    return mpc(0)


class TruncatedSeries:
    """c_0 + c_1 t + ... + c_P t^P; every operation truncates at the shorter order."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs, var="t"):
        self.coeffs = [to_mpc(c) for c in coeffs] or [_zero()]
        self.var = var

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else _zero()

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return f"TruncatedSeries(order={self.order}, var={self.var!r})"

    @classmethod
    def from_values(cls, values, order=None, var="t"):
        vals = list(values)
        if order is not None:
            vals = (vals + [0] * (order + 1))[:order + 1]
        return cls(vals, var)

    @classmethod
    def identity(cls, order, var="t"):
        return cls([0, 1] + [0] * (order - 1), var) if order >= 1 else cls([0], var)

    def truncate(self, P):
        return TruncatedSeries((self.coeffs + [_zero()] * (P + 1))[:P + 1], self.var)

    def __add__(self, other):
        n = min(len(self), len(other))
        return TruncatedSeries([self.coeffs[i] + other.coeffs[i] for i in range(n)], self.var)

    def __sub__(self, other):
        n = min(len(self), len(other))
        return TruncatedSeries([self.coeffs[i] - other.coeffs[i] for i in range(n)], self.var)

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.var)

    def scale(self, s):
        s = to_mpc(s)
        return TruncatedSeries([s * c for c in self.coeffs], self.var)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        return TruncatedSeries(_mul(self.coeffs, other.coeffs, min(self.order, other.order)),
                               self.var)

    def derivative(self):
        return TruncatedSeries([k * self.coeffs[k] for k in range(1, len(self))] or [0],
                               self.var)

    def reciprocal(self, P=None):
        """1/F; needs c_0 != 0."""
        P = self.order if P is None else P
        c = self.coeffs
        if c[0] == 0:
            raise NotInvertible("reciprocal needs a non-zero constant term")
        inv0 = 1 / c[0]
        out = [inv0]
        for k in range(1, P + 1):
            s = _zero()
            for i in range(1, min(k, self.order) + 1):
                s += c[i] * out[k - i]
            out.append(-s * inv0)
        return TruncatedSeries(out, self.var)

    def max_abs_diff(self, other, P=None):
        P = min(self.order, other.order) if P is None else P
        return max((abs(self[k] - other[k]) for k in range(P + 1)), default=mpfr(0))

    def to_json(self):
        return [dec_complex(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data, var="t"):
        return cls([to_mpc(tuple(pair)) for pair in data], var)


def _mul(a, b, P):
    out = [_zero()] * (P + 1)
    na, nb = len(a), len(b)
    for i in range(min(na, P + 1)):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(nb, P + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries, P=None) -> TruncatedSeries:
    """outer(inner(t)) to order P by Horner's rule; inner must have no constant term."""
    if P is None:
        P = min(outer.order, inner.order) if inner.order > 0 else outer.order
    if inner[0] != 0:
        raise CompositionConstantTerm(f"inner series has constant term {inner[0]}")
    g = inner.truncate(P).coeffs
    acc = [_zero()] * (P + 1)
    for k in range(min(outer.order, P), -1, -1):
        acc = _mul(acc, g, P)
        acc[0] += outer[k]
    return TruncatedSeries(acc, inner.var)


def _check_invertible(F):
    if F[0] != 0:
        raise NotInvertible(f"constant term {F[0]} is not zero")
    if F[1] == 0:
        raise NotInvertible("linear coefficient is zero")


def invert_recurrence(F: TruncatedSeries, P=None) -> TruncatedSeries:
    """Compositional inverse by the order-by-order recurrence on F(a(t)) = t.

    a_k = -(1/c_1) sum_{m=2}^{k} c_m [t^k] a^m, with the powers table built
    incrementally (each [t^k] a^m only needs a_1 .. a_{k-1}).
    """
    P = F.order if P is None else P
    _check_invertible(F)
    c = [F[m] for m in range(P + 1)]
    inv1 = 1 / c[1]
    a = [_zero(), inv1]
    # pw[m][k] = [t^k] a^m, nonzero only for k >= m
    pw = [None, a]
    for k in range(2, P + 1):
        s = _zero()
        for m in range(2, k + 1):
            if len(pw) <= m:
                pw.append([_zero()] * m)
            row, prev = pw[m], pw[m - 1]
            v = _zero()
            for i in range(1, k - m + 2):
                v += a[i] * prev[k - i]
            row.append(v)
            s += c[m] * v
        a.append(-s * inv1)
    return TruncatedSeries(a[:P + 1], F.var)


def invert_newton(F: TruncatedSeries, P=None) -> TruncatedSeries:
    """Compositional inverse by Newton iteration a <- a - (F(a) - t)/F'(a), doubling the order."""
    P = F.order if P is None else P
    _check_invertible(F)
    dF = F.derivative()
    a = TruncatedSeries([0, 1 / F[1]], F.var)
    n = 1
    while n < P:
        n = min(2 * n, P)
        an = a.truncate(n)
        resid = series_compose(F.truncate(n), an, n) - TruncatedSeries.identity(n, F.var)
        deriv = series_compose(dF.truncate(n), an, n) if dF.order >= 0 else None
        a = an - resid * deriv.reciprocal(n)
    return a.truncate(P)


def invert_lagrange(F: TruncatedSeries, P=None) -> TruncatedSeries:
    """Compositional inverse by Lagrange inversion: [t^n] a = (1/n) [w^(n-1)] (w/F(w))^n."""
    P = F.order if P is None else P
    _check_invertible(F)
    if P == 0:
        return TruncatedSeries([0], F.var)
    h = TruncatedSeries([F[k + 1] for k in range(P)], F.var).reciprocal(P - 1)
    out = [_zero()]
    power = TruncatedSeries([1], F.var).truncate(P - 1)
    for n in range(1, P + 1):
        power = power * h
        out.append(power[n - 1] / n)
    return TruncatedSeries(out, F.var)


def series_invert(F: TruncatedSeries, P=None, method="recurrence") -> TruncatedSeries:
    """Compositional inverse a with F(a(t)) = t to order P."""
    fn = {"recurrence": invert_recurrence, "newton": invert_newton,
          "lagrange": invert_lagrange}.get(method)
    if fn is None:
        raise ValueError(f"unknown inversion method {method!r}")
    return fn(F, P)


# -- two-variable series ----------------------------------------------------

class Series2D:
    """Coefficients indexed (t-degree, x-degree), truncated at (T, X)."""

    def __init__(self, T, X, coeffs=None):
        self.T, self.X = T, X
        self.c = coeffs or {}

    def get(self, i, j):
        return self.c.get((i, j), _zero())

    def add_to(self, i, j, v):
        if i <= self.T and j <= self.X:
            self.c[(i, j)] = self.get(i, j) + v

    def __mul__(self, other):
        out = Series2D(min(self.T, other.T), min(self.X, other.X))
        for (i1, j1), v1 in self.c.items():
            if v1 == 0:
                continue
            for (i2, j2), v2 in other.c.items():
                if i1 + i2 <= out.T and j1 + j2 <= out.X:
                    out.add_to(i1 + i2, j1 + j2, v1 * v2)
        return out

    def max_abs_diff(self, other):
        keys = set(self.c) | set(other.c)
        T, X = min(self.T, other.T), min(self.X, other.X)
        return max((abs(self.get(*k) - other.get(*k)) for k in keys
                    if k[0] <= T and k[1] <= X), default=mpfr(0))

    def odd_t_max(self):
        return max((abs(v) for (i, _), v in self.c.items() if i % 2), default=mpfr(0))

    def to_json(self):
        return [[i, j, *dec_complex(v)] for (i, j), v in sorted(self.c.items()) if v != 0]


@dataclass
class PreparationWitness:
    order: int
    shift: object          # c_0 subtracted before inversion
    a: TruncatedSeries     # a(x), the compositional inverse
    Q: Series2D            # unit with T0 g = (t^2 - a(x)) Q
    q00: object
    c1: object
    residual: object       # max |T0 g - P Q| over t-deg <= 2P, x-deg <= P
    evenness: object       # max |coefficient| on odd t-degree of T0 g and P Q

    def to_json(self):
        return {
            "order": self.order,
            "shift": dec_complex(self.shift),
            "a": self.a.to_json(),
            "distinguished_polynomial": "t^2 - a(x)",
            "Q": self.Q.to_json(),
            "Q00": dec_complex(self.q00),
            "c1": dec_complex(self.c1),
            "residual_max": dec(self.residual),
            "evenness_max": dec(self.evenness),
        }


def prepare_2d(F: TruncatedSeries, P=None, method="recurrence") -> PreparationWitness:
    """Preparation data of g(t, x) = F(t^2) - x.

    a = F^(-1); Q(t, x) = u(t^2, x) with u(s, x) = (F(s) - x)/(s - a(x)),
    computed by synthetic division: u_i(x) = sum_{k>i} c_k a(x)^(k-1-i).
    """
    P = F.order if P is None else P
    F = F.truncate(P)
    shift = F[0]
    if shift != 0:
        F = TruncatedSeries([0] + F.coeffs[1:], F.var)
    a = series_invert(F, P, method)
    a.var = "x"
    # powers a^0 .. a^(P-1), truncated at x^P
    pows = [TruncatedSeries([1], "x").truncate(P)]
    for _ in range(1, P):
        pows.append(pows[-1] * a)
    u = []
    for i in range(P):
        acc = [_zero()] * (P + 1)
        for k in range(i + 1, P + 1):
            ck = F[k]
            if ck == 0:
                continue
            pk = pows[k - 1 - i].coeffs
            for j in range(P + 1):
                acc[j] += ck * pk[j]
        u.append(acc)
    T = 2 * P
    Q = Series2D(T, P)
    for i, ui in enumerate(u):
        for j, v in enumerate(ui):
            if v != 0:
                Q.add_to(2 * i, j, v)
    G = Series2D(T, P)
    for k in range(1, P + 1):
        if F[k] != 0:
            G.add_to(2 * k, 0, F[k])
    G.add_to(0, 1, mpc(-1))
    Pp = Series2D(T, P)
    Pp.add_to(2, 0, mpc(1))
    for j in range(P + 1):
        if a[j] != 0:
            Pp.add_to(0, j, -a[j])
    PQ = Pp * Q
    return PreparationWitness(
        order=P, shift=shift, a=a, Q=Q, q00=Q.get(0, 0), c1=F[1],
        residual=G.max_abs_diff(PQ),
        evenness=max(G.odd_t_max(), PQ.odd_t_max()),
    )


def inversion_diagnostics(F: TruncatedSeries, P=None, lagrange_order=30):
    """Preparation witness plus the cross-checks of the inverse.

    Returns ``(witness, errors)``; ``errors`` maps each check to its largest
    per-coefficient deviation.
    """
    P = F.order if P is None else P
    w = prepare_2d(F, P)
    G = TruncatedSeries([0] + F.truncate(P).coeffs[1:], F.var)
    ident = TruncatedSeries.identity(P, F.var)
    lp = min(P, lagrange_order)
    errors = {
        "roundtrip_f_after_a": series_compose(G, w.a, P).max_abs_diff(ident),
        "roundtrip_a_after_f": series_compose(w.a, G, P).max_abs_diff(ident),
        "newton_vs_recurrence": invert_newton(G, P).max_abs_diff(w.a),
        "lagrange_vs_recurrence": invert_lagrange(G, lp).max_abs_diff(w.a.truncate(lp)),
        "preparation_residual": w.residual,
    }
    return w, errors


@dataclass
class EnvelopeReport:
    rho: list            # (p, rho_p) for p >= 1
    sup: object
    sup_index: int
    increasing: bool
    unbounded_trend: bool

    def to_json(self):
        return {"rho": [[p, dec(r)] for p, r in self.rho], "sup": dec(self.sup),
                "sup_index": self.sup_index, "increasing": self.increasing,
                "unbounded_trend": self.unbounded_trend}


def class_envelope_diag(S: TruncatedSeries, M, P=None) -> EnvelopeReport:
    """rho_p = (|c_p| / m_p)^(1/p) over 1 <= p <= P.

    ``unbounded_trend`` flags a strictly increasing rho that at least grew by
    half between P/2 and P.
    """
    P = S.order if P is None else min(P, S.order)
    rho = []
    for p in range(1, P + 1):
        c = abs(S[p])
        if c == 0:
            rho.append((p, mpfr(0)))
            continue
        rho.append((p, gmpy2.exp((gmpy2.log(c) - M.log_m(p)) / p)))
    if not rho:
        return EnvelopeReport([], mpfr(0), 0, False, False)
    sup_p, sup = max(rho, key=lambda pr: (pr[1], -pr[0]))
    inc = all(b[1] > a[1] for a, b in zip(rho, rho[1:]))
    half = rho[max(0, len(rho) // 2 - 1)][1]
    trend = inc and len(rho) >= 4 and rho[-1][1] > mpfr(1.5) * half
    return EnvelopeReport(rho, sup, sup_p, inc, trend)


__all__ = ["TruncatedSeries", "Series2D", "PreparationWitness", "EnvelopeReport",
           "series_compose", "series_invert", "invert_recurrence", "invert_newton",
           "invert_lagrange", "prepare_2d", "class_envelope_diag", "inversion_diagnostics"]
