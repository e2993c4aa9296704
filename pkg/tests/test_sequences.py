import math
import threading
import warnings
from fractions import Fraction

import gmpy2
import mpmath
import pytest

import carleman.sequences as sq
from carleman.errors import InvalidSequence, WideningDegenerate
from carleman.sequences import (GrowthSequence, WidenedSequence, inclusion_diag, seq_term,
                                seq_validate, sequence_from_spec, wep_widen)

from oracles import constant_widening, log_m_direct, log_ratio_family, widened_ratios


def close(a, b, rel=1e-25):
    with mpmath.workdps(100):
        a, b = mpmath.mpf(str(a)), mpmath.mpf(str(b))
        return abs(a - b) <= rel * max(abs(b), 1)


# -- seq_term ---------------------------------------------------------------

def test_log_family_first_terms():
    M = GrowthSequence("log")
    assert seq_term(M, 0) == 0
    with mpmath.workdps(80):
        want = mpmath.log(mpmath.log(1 + mpmath.e))
    assert close(seq_term(M, 1), want)
    # the quoted 0.27253 agrees to four digits; log(log(1+e)) = 0.2725139...
    assert round(float(seq_term(M, 1)), 4) == 0.2725


def test_factorial_term_is_log_120():
    assert close(seq_term(GrowthSequence("factorial"), 5), mpmath.log(120))


def test_log_terms_match_direct_product():
    M = GrowthSequence("log")
    ratio = log_ratio_family()
    for n in (2, 17, 300):
        assert close(M.log_m(n), log_m_direct(ratio, n), rel=1e-40)


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        seq_term(GrowthSequence("factorial"), -1)


def test_nonpositive_custom_ratio_is_invalid():
    M = GrowthSequence("custom", table=["2", "-1", "3"])
    with pytest.raises(InvalidSequence) as exc:
        M.log_m(3)
    assert exc.value.code == "invalid-sequence"


def test_nonpositive_family_parameter_is_invalid():
    with pytest.raises(InvalidSequence):
        GrowthSequence("constant", {"ratio": "0"})


def test_memo_is_monotone_and_deterministic():
    M = GrowthSequence("log")
    later = M.log_m(500)
    early = M.log_m(20)
    assert M.log_m(500) == later
    assert GrowthSequence("log").log_m(20) == early


# -- seq_validate -------------------------------------------------------------

def test_factorial_diagnostics():
    d = seq_validate(GrowthSequence("factorial"), 10)
    assert d.log_convex_ok and d.first_violation is None
    want = sum(Fraction(1, (k + 1) ** 2) for k in range(10))
    assert close(d.qa_partial_sums[-1][1], mpmath.mpf(want.numerator) / want.denominator)
    assert abs(float(d.qa_partial_sums[-1][1]) - 1.54977) < 1e-5


def test_decreasing_ratios_flag_first_violation():
    d = seq_validate(GrowthSequence("custom", table=["2", "1.5", "4/3"]), 3)
    assert not d.log_convex_ok
    assert d.first_violation == 2


def test_log_family_partial_sums_match_direct_sum():
    d = seq_validate(GrowthSequence("log"), 10_000)
    assert d.log_convex_ok
    with mpmath.workdps(60):
        want = mpmath.fsum(1 / ((k + 1) * mpmath.log(k + 1 + mpmath.e)) for k in range(10_000))
    assert d.qa_partial_sums[-1][0] == 10_000
    assert close(d.qa_partial_sums[-1][1], want, rel=1e-40)


def test_diagnostic_samples_are_monotone():
    d = seq_validate(GrowthSequence("log"), 4096)
    qa = [v for _, v in d.qa_partial_sums]
    rr = [v for _, v in d.root_ratio_samples]
    assert all(b >= a for a, b in zip(qa, qa[1:]))
    assert all(b >= a for a, b in zip(rr, rr[1:]))


def test_alpha_divergence_flag():
    assert seq_validate(GrowthSequence("factorial"), 100).alpha_divergence
    assert not seq_validate(GrowthSequence("constant"), 100).alpha_divergence
    # log(j + e) passes 4 only near j = 52
    assert not seq_validate(GrowthSequence("log"), 40).alpha_divergence
    assert seq_validate(GrowthSequence("log"), 100).alpha_divergence


def test_n_max_floor():
    with pytest.raises(ValueError):
        seq_validate(GrowthSequence("log"), 1)


# -- wep_widen ------------------------------------------------------------------

def test_constant_widening_values():
    K = wep_widen(GrowthSequence("constant"), warn=False)
    rec = K.record
    assert rec.mu(1) == 1 and rec.beta(1) == 1 and K.log_m(1) == 0
    assert close(rec.mu(2), mpmath.mpf(3) / 2)
    assert close(rec.beta(2), mpmath.sqrt(mpmath.mpf(3) / 2))
    assert close(gmpy2.exp(K.log_m(2)), mpmath.sqrt(mpmath.mpf(3) / 2))
    mu3 = constant_widening(3)[3]
    assert close(rec.mu(3), mpmath.mpf(mu3.numerator) / mu3.denominator)
    assert abs(float(rec.beta(3)) - 1.354006) < 1e-6
    assert abs(float(gmpy2.exp(K.log_m(3))) - 1.658312) < 1e-6


def test_constant_widening_mu_is_harmonic():
    K = WidenedSequence(GrowthSequence("constant"))
    H = constant_widening(60)
    for j in (1, 7, 60):
        assert close(K.record.mu(j), mpmath.mpf(H[j].numerator) / H[j].denominator)


def test_widened_log_matches_mpmath_widening():
    K = WidenedSequence(GrowthSequence("log"))
    betas, mus = widened_ratios(log_ratio_family(), 200)
    for j in (1, 2, 3, 50, 200):
        assert close(K.ratio(j), betas[j], rel=1e-40)
        assert close(K.record.mu(j), mus[j], rel=1e-40)


def test_widening_rejects_non_log_convex_input():
    with pytest.raises(InvalidSequence):
        wep_widen(GrowthSequence("custom", table=["2", "1.5", "4/3"]), 3)


def test_factorial_widening_warns_degenerate():
    with pytest.warns(WideningDegenerate, match="widening-degenerate"):
        K = wep_widen(GrowthSequence("factorial"), 1000)
    assert K.record.degenerate


def test_custom_stalled_mu_warns_degenerate():
    table = [str(j * j) for j in range(1, 2001)]
    with pytest.warns(WideningDegenerate):
        wep_widen(GrowthSequence("custom", table=table), 2000)


def test_log_widening_is_quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        K = wep_widen(GrowthSequence("log"))
    assert not K.record.degenerate


def test_widening_record_identity_and_beta_dominance():
    K = WidenedSequence(GrowthSequence("log"))
    rec = K.record
    for j in range(1, 2000, 37):
        assert rec.identity_residual(j) <= gmpy2.mpfr("1e-25")
        if rec.mu(j) >= 1:
            assert rec.beta(j) >= K.parent.ratio(j)
    assert seq_validate(K, 2000).log_convex_ok


def test_partial_sum_slacks_nonnegative():
    K = WidenedSequence(GrowthSequence("log"))
    _, slacks = K.record.partial_sum_slacks(3000)
    assert all(s >= 0 for s in slacks[2:])


# -- inclusion_diag ---------------------------------------------------------------

def test_inclusion_of_sequence_in_itself():
    M = GrowthSequence("log")
    r = inclusion_diag(M, M, 100)
    assert r.inclusion_sup == 1
    assert all(v == 1 for _, v in r.growth_samples)


def test_inclusion_constant_and_its_widening():
    N = GrowthSequence("constant")
    r = inclusion_diag(N, wep_widen(N, warn=False), 3)
    assert abs(float(r.growth_samples[-1][1]) - 1.658312 ** (1 / 3)) < 1e-6
    assert abs(float(r.growth_samples[-1][1]) - 1.18365) < 1e-5


def test_log_family_inside_gevrey_one():
    r = inclusion_diag(GrowthSequence("log"), GrowthSequence("factorial"), 100)
    with mpmath.workdps(40):
        vals = [mpmath.exp((log_m_direct(log_ratio_family(), n) - mpmath.log(mpmath.factorial(n))) / n)
                for n in range(1, 101)]
    assert r.inclusion_sup_index == 1 + max(range(100), key=lambda i: vals[i])
    assert r.inclusion_sup_index <= 3
    assert close(r.inclusion_sup, max(vals), rel=1e-30)
    assert r.growth_monotone


# -- far region -------------------------------------------------------------------

@pytest.mark.parametrize("family", ["log", "factorial", "widened"])
def test_checkpointed_terms_match_dense_terms(monkeypatch, family):
    def make():
        base = GrowthSequence("log" if family == "widened" else family)
        return WidenedSequence(base) if family == "widened" else base

    dense = make()
    want = {n: dense.term(n) for n in (1500, 2047, 2048, 3001, 4999)}
    monkeypatch.setattr(sq, "DENSE_LIMIT", 1024)
    monkeypatch.setattr(sq, "STRIDE", 64)
    far = make()
    for n, t in want.items():
        got = far.term(n)
        # checkpoints are advanced in quad precision
        assert close(got.log_m, t.log_m, rel=1e-30)
        assert close(got.ratio, t.ratio, rel=1e-30)


def test_first_index_in_far_region_matches_linear_scan(monkeypatch):
    dense = WidenedSequence(GrowthSequence("log"))
    thr = (dense.ratio(3000) + dense.ratio(3001)) / 2
    want = next(j for j in range(1, 6000) if dense.ratio(j) > thr)
    monkeypatch.setattr(sq, "DENSE_LIMIT", 512)
    monkeypatch.setattr(sq, "STRIDE", 32)
    far = WidenedSequence(GrowthSequence("log"))
    assert far.first_index(lambda t: t.ratio > thr) == want


def test_concurrent_access_agrees():
    M = GrowthSequence("log")
    out = {}

    def work(i):
        out[i] = [M.log_m(n) for n in range(1, 3000, 7)]

    ts = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    ref = [GrowthSequence("log").log_m(n) for n in range(1, 3000, 7)]
    assert all(v == ref for v in out.values())


def test_spec_round_trip():
    for seq in (GrowthSequence("log"), GrowthSequence("factorial", {"scale": "2"}),
                GrowthSequence("custom", table=["1", "2", "3"]),
                WidenedSequence(GrowthSequence("log"))):
        again = sequence_from_spec(seq.spec())
        assert again.spec() == seq.spec()
        assert again.log_m(3) == seq.log_m(3)


def test_widened_log_terms_at_large_index_against_float_stream():
    K = WidenedSequence(GrowthSequence("log"))
    n = 300_000
    k = sum(1.0 / (j * math.log(j + math.e)) for j in range(1, n + 1))
    beta = math.log(n + math.e) * math.sqrt(k)
    assert abs(float(K.ratio(n)) / beta - 1) < 1e-9
