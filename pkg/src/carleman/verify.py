"""Certified checks of the construction, with explicit log-domain slack.

Every check yields a CheckResult whose ``slack`` is a log margin (>= 0 means
the inequality holds).  Inequality checks whose slack sits inside the
rounding envelope are recomputed at doubled precision up to a cap and are
marked ``indeterminate`` if still unresolved.  Points where an inequality
is tight by construction (the brick's own segment) are identity checks
instead, compared against ``IDENTITY_TOL``.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from carleman._numeric import LogComplex, dec, log_sum, workprec
from carleman.construction import CounterexampleFn
from carleman.errors import WideningDegenerate, WrongPipeline
from carleman.evaluate import (brick_derivative, extension_tail_bound, f_derivative,
                               log_factorial, s_derivative)
from carleman.sequences import GrowthSequence, WidenedSequence

INEQ_TOL = mpfr("1e-30")
IDENTITY_TOL = mpfr("1e-20")
ESCALATION_FACTOR = 4  # precision cap = factor * build precision


@dataclass(frozen=True)
class Tolerances:
    identity: object = IDENTITY_TOL
    inequality: object = INEQ_TOL
    escalation_factor: int = ESCALATION_FACTOR


DEFAULT_TOLS = Tolerances()

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


@dataclass
class CheckResult:
    name: str
    indices: dict
    slack: object
    status: str
    precision_used: int
    kind: str = "inequality"

    @property
    def passed(self):
        return self.status == PASS

    def to_json(self):
        return {"name": self.name, "indices": self.indices, "kind": self.kind,
                "slack": dec(self.slack), "status": self.status,
                "precision": self.precision_used}


@dataclass
class VerificationReport:
    checks: list
    config: dict = field(default_factory=dict)

    @property
    def overall(self):
        return PASS if all(c.passed for c in self.checks) else FAIL

    def to_json(self):
        return {"overall": self.overall, "config": self.config,
                "checks": [c.to_json() for c in self.checks]}


def _run(F, name, indices, fn, kind="inequality", tols=DEFAULT_TOLS):
    """Evaluate ``fn(F)`` -> slack and classify, escalating precision near zero."""
    prec = F.prec
    with workprec(prec):
        slack = fn(F)
    if kind == "identity":
        status = PASS if abs(slack) <= tols.identity else FAIL
        return CheckResult(name, indices, slack, status, prec, kind)
    if kind == "exact":
        return CheckResult(name, indices, slack, PASS if slack >= 0 else FAIL, prec, kind)
    cap = tols.escalation_factor * F.prec
    while abs(slack) < tols.inequality and prec * 2 <= cap:
        prec *= 2
        G = F.at_precision(prec)
        with workprec(prec):
            slack = fn(G)
    if abs(slack) < tols.inequality:
        status = INDETERMINATE
    else:
        status = PASS if slack > 0 else FAIL
    return CheckResult(name, indices, slack, status, prec, kind)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# -- per-brick upper bounds ------------------------------------------------

def _tight_orders(seq: GrowthSequence, log_xi, p_max):
    """Orders p <= p_max whose closed segment [b_p, b_{p+1}] contains xi (b_0 = 0)."""
    out = []
    with workprec(seq.prec):
        for p in range(p_max + 1):
            lo_ok = p == 0 or seq.log_ratio(p) <= log_xi
            if lo_ok and log_xi <= seq.log_ratio(p + 1):
                out.append(p)
            elif not lo_ok:
                break
    return out


def brick_slack(F, t, p, which):
    """log m_p - log(A (1/r)^(p+1)) for brick t, r = y (global) or |x| (half-line)."""
    b = F.bricks[t]
    if which == "brick_global":
        return F.mt.log_m(p) - (b.log_A + (p + 1) * b.log_inv_y)
    return F.m.log_m(p) - (b.log_A + (p + 1) * b.log_inv_x)


def _min_slack(F, t, which, orders):
    best, arg = None, None
    for p in orders:
        s = brick_slack(F, t, p, which)
        if best is None or s < best:
            best, arg = s, p
    return best, arg


def verify_upper_bounds(F: CounterexampleFn, p_max=300, workers=1, tols=DEFAULT_TOLS):
    """Per-brick and aggregated global/half-line bounds for p <= p_max."""
    jobs = []
    for t, b in enumerate(F.bricks):
        for which, seq, lxi in (("brick_global", F.mt, b.log_inv_y), ("brick_halfline", F.m, b.log_inv_x)):
            tight = _tight_orders(seq, lxi, p_max) if gmpy2.is_finite(lxi) else []
            rest = [p for p in range(p_max + 1) if p not in tight]
            jobs.append((t, which, tight, rest))

    def one(job):
        t, which, tight, rest = job
        n = F.bricks[t].n
        out = []
        for p in tight:
            out.append(_run(F, f"{which}_tight", {"j": t, "n": n, "p": p},
                            lambda G, t=t, p=p: brick_slack(G, t, p, which), "identity", tols))
        if rest:
            with workprec(F.prec):
                _, arg = _min_slack(F, t, which, rest)
            out.append(_run(F, f"{which}_bound",
                            {"j": t, "n": n, "p_max": p_max, "p_argmin": arg},
                            lambda G, t=t: _min_slack(G, t, which, rest)[0], tols=tols))
        return out

    results = [r for rs in _map(one, jobs, workers) for r in rs]

    def aggregate(G, p, which):
        terms = []
        for b in G.bricks:
            lr = b.log_inv_y if which == "global" else b.log_inv_x
            terms.append(LogComplex(b.log_A - b.n * gmpy2.log(2) + (p + 1) * lr, mpfr(0)))
        seq = G.mt if which == "global" else G.m
        return seq.log_m(p) - log_sum(terms).log_mag

    for which in ("global", "halfline"):
        def worst(G, which=which):
            return min(aggregate(G, p, which) for p in range(p_max + 1))
        with workprec(F.prec):
            arg = min(range(p_max + 1), key=lambda p: aggregate(F, p, which))
        results.append(_run(F, f"{which}_bound", {"p_max": p_max, "p_argmin": arg}, worst,
                            tols=tols))
    return results


def bounds_rows(F: CounterexampleFn, p_max=300):
    """Rows (n, p, slack_global, slack_halfline) per brick and order."""
    rows = []
    with workprec(F.prec):
        for t, b in enumerate(F.bricks):
            for p in range(p_max + 1):
                rows.append((b.n, p, brick_slack(F, t, p, "brick_global"), brick_slack(F, t, p, "brick_halfline")))
    return rows


# -- peaks and lower bounds -----------------------------------------------

def _peak_target(G, n):
    """log(n! 2^(-n) m~_n)."""
    return log_factorial(n) - n * gmpy2.log(2) + G.mt.log_m(n)


def verify_peaks(F: CounterexampleFn, workers=1, tols=DEFAULT_TOLS):
    """Per j: peak identity, earlier/later brick smallness, composite and scaled lower bounds."""
    J = F.J

    def one(j):
        n = F.subseq[j]
        out = []
        idx = {"j": j, "n": n}
        out.append(_run(F, "peak_identity", idx,
                        lambda G: brick_derivative(G.bricks[j], n, G.bricks[j].x).log_mag
                        - _peak_target(G, n), "identity", tols))
        if J >= 1:
            for t in range(j):
                out.append(_run(
                    F, "earlier_bricks", {"j": j, "n": n, "t": t, "n_t": F.subseq[t]},
                    lambda G, t=t: (-(n + 2) * gmpy2.log(2) + G.mt.log_m(n))
                    - ((n + 1) * G.bricks[t].log_inv_y + G.bricks[t].log_A), tols=tols))
            if j < J:
                gap = F.subseq[j + 1] - n - 3
                out.append(_run(F, "later_bricks", {"j": j, "n": n, "n_next": F.subseq[j + 1]},
                                lambda G: gap * gmpy2.log(2), "exact"))
            out.append(_run(F, "composite_lower", idx,
                            lambda G: s_derivative(G, n, G.bricks[j].x).log_mag
                            - (_peak_target(G, n) - gmpy2.log(2)), tols=tols))
            out.append(_run(F, "extension_robust", idx, lambda G: _extension_margin(G, j),
                            tols=tols))
        with workprec(F.prec):
            xw = dec(F.bricks[j].x / 2)
        out.append(_run(F, "scaled_lower", {"j": j, "n": n, "x": xw},
                        lambda G: f_derivative(G, n, G.bricks[j].x / 2).log_mag
                        - (log_factorial(n) + G.mt.log_m(n)), tols=tols))
        return out

    return [r for rs in _map(one, range(J + 1), workers) for r in rs]


def _extension_margin(G, j):
    """log(|S^(n)(x_n)| - (1/2) n! 2^(-n) m~_n) minus the tail bound of any continuation."""
    n = G.subseq[j]
    a = s_derivative(G, n, G.bricks[j].x).log_mag
    b = _peak_target(G, n) - gmpy2.log(2)
    if not a > b:
        return a - b
    excess = a + gmpy2.log(-gmpy2.expm1(b - a))
    return excess - extension_tail_bound(G, n, G.J + 1)


# -- certificate ------------------------------------------------------------

@dataclass
class CertificateRow:
    j: int
    n: int
    x: object            # witness point x_{n_j} / 2
    log_lower_bound: object
    log_envelope: object
    log_r: object
    log_r_identity: object
    r: object


@dataclass
class Certificate:
    rows: list
    increasing: bool
    warnings: list

    def to_json(self):
        return {
            "increasing": self.increasing,
            "warnings": self.warnings,
            "rows": [{"j": r.j, "n_j": r.n, "x": dec(r.x), "log_lower_bound": dec(r.log_lower_bound),
                      "log_envelope": dec(r.log_envelope), "r_j": dec(r.r),
                      "log_r_j": dec(r.log_r), "log_r_identity": dec(r.log_r_identity)}
                     for r in self.rows],
        }

    def csv_rows(self):
        yield ["j", "n_j", "log_lower_bound", "log_envelope", "r_j"]
        for r in self.rows:
            yield [r.j, r.n, dec(r.log_lower_bound), dec(r.log_envelope), dec(r.r)]


def nonmembership_certificate(F: CounterexampleFn, N: GrowthSequence,
                              tols=DEFAULT_TOLS) -> Certificate:
    """r_j = (k_{n_j} / N_{n_j})^(1/n_j) with K = M~ the widening of N.

    The lower bound is n_j! k_{n_j} (certified by the scaled lower-bound check)
    and the envelope is n_j! N_{n_j}, i.e. constants A = B = 1.
    """
    K = F.mt
    if not isinstance(K, WidenedSequence):
        raise WrongPipeline("M~ of the build is not a widened sequence")
    notes = []
    if K.record.degenerate:
        notes.append(f"widening-degenerate: {K.record.degenerate_reason}")
        warnings.warn(WideningDegenerate(notes[-1]), stacklevel=2)
    rows = []
    with workprec(F.prec):
        for j, n in enumerate(F.subseq):
            lk, ln = K.log_m(n), N.log_m(n)
            log_r = (lk - ln) / n
            ident = K.record.sum_log_mu(n) / (2 * n)
            if abs(log_r - ident) > tols.identity * max(abs(log_r), mpfr(1)):
                raise WrongPipeline(f"k_n/N_n differs from prod sqrt(mu_k) at n={n}")
            lf = log_factorial(n)
            rows.append(CertificateRow(j, n, F.bricks[j].x / 2, lf + lk, lf + ln, log_r, ident,
                                       gmpy2.exp(log_r)))
    inc = all(b.log_r > a.log_r for a, b in zip(rows, rows[1:]))
    return Certificate(rows, inc, notes)


def taylor_envelope_check(F: CounterexampleFn, series, M=None, tols=DEFAULT_TOLS):
    """|c_p| <= 2^(p+1) m_p for every coefficient of the Taylor series of f."""
    M = M or F.m

    def slack(G):
        worst = None
        for p in range(series.order + 1):
            c = abs(series[p])
            if c == 0:
                continue
            s = (p + 1) * gmpy2.log(2) + M.log_m(p) - gmpy2.log(c)
            worst = s if worst is None or s < worst else worst
        return worst if worst is not None else mpfr("inf")

    # the series is fixed data, so no escalation beyond the build precision
    return _run(F, "taylor_envelope", {"p_max": series.order}, lambda G: slack(F), tols=tols)


def run_all(F: CounterexampleFn, p_max=300, workers=1, config=None,
            tols=DEFAULT_TOLS) -> VerificationReport:
    checks = verify_upper_bounds(F, p_max, workers, tols) + verify_peaks(F, workers, tols)
    return VerificationReport(checks, dict(config or {}))


__all__ = ["CheckResult", "VerificationReport", "Certificate", "CertificateRow",
           "verify_upper_bounds", "verify_peaks", "nonmembership_certificate", "bounds_rows",
           "brick_slack", "run_all", "taylor_envelope_check", "Tolerances", "DEFAULT_TOLS", "INEQ_TOL", "IDENTITY_TOL", "PASS", "FAIL", "INDETERMINATE"]
