import math

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc, mpfr

from carleman._numeric import LogComplex, dec
from carleman.construction import Brick, build_counterexample, single_brick_fn
from carleman.errors import PrecisionOverflow
from carleman.evaluate import (brick_derivative, derivative_sweep, extension_tail_bound,
                               f_derivative, global_bound_log, halfline_bound_log, log_factorial,
                               s_derivative, sweep_grid, taylor_coeffs)
from carleman.sequences import GrowthSequence

from oracles import brick_fd, taylor_complex, taylor_mp

TINY = mpfr("1e-60")


@pytest.fixture(scope="module")
def factorial_j1():
    f = GrowthSequence("factorial")
    return build_counterexample(f, f, 1)


@pytest.fixture
def unit_brick():
    return Brick.from_values(0, 1, 0, 1)


def test_cauchy_kernel_first_derivative(unit_brick):
    v = brick_derivative(unit_brick, 1, 0)
    assert abs(v.log_mag) < TINY
    assert abs(abs(v.phase) - gmpy2.const_pi()) < TINY
    assert abs(v.to_complex() - (-1)) < TINY


def test_cauchy_kernel_value(unit_brick):
    v = brick_derivative(unit_brick, 0, 0)
    assert abs(v.log_mag) < TINY
    assert abs(v.phase + gmpy2.const_pi() / 2) < TINY
    assert abs(v.to_complex() - mpc(0, -1)) < TINY


def test_negative_order_rejected(unit_brick):
    with pytest.raises(ValueError):
        brick_derivative(unit_brick, -1, 0)


@pytest.mark.parametrize("p", range(7))
def test_closed_form_matches_finite_differences(p):
    b = Brick.from_values(2, "0.5", "-0.4", "0.3")
    got = complex(brick_derivative(b, p, "0.1").to_complex())
    want = brick_fd(2, mpmath.mpf("0.5"), mpmath.mpf("-0.4"), mpmath.mpf("0.3"), p,
                    mpmath.mpf("0.1"))
    assert abs(got - want) <= 1e-6 * abs(want)


def test_single_brick_scaling():
    b = Brick.from_values(3, "0.7", "-0.2", "0.05")
    F = single_brick_fn(b)
    for p in (0, 1, 5, 40):
        for x in ("-0.1", "0", "0.3"):
            lhs = f_derivative(F, p, x)
            rhs = brick_derivative(b, p, 2 * mpfr(x)).scale_log((p + 1) * gmpy2.log(2))
            assert abs(lhs.log_mag - rhs.log_mag) < TINY
            assert abs(lhs.phase - rhs.phase) < TINY


def test_two_bricks_at_origin_match_complex_sum(factorial_j1):
    F = factorial_j1
    bricks = [(b.n, float(b.A), float(b.x), float(b.y)) for b in F.bricks]
    want = taylor_complex(bricks, 0)[0]
    got = complex(f_derivative(F, 0, 0).to_complex())
    assert abs(got - want) <= 1e-12 * abs(want)


def test_scaled_lower_bound_at_n19(factorial_j1):
    F = factorial_j1
    b = F.bricks[1]
    v = f_derivative(F, 19, b.x / 2)
    assert v.log_mag >= log_factorial(19) + F.mt.log_m(19) - gmpy2.log(2)
    assert v.log_mag >= log_factorial(19) + F.mt.log_m(19)


def test_tail_bound_formulas(factorial_j1):
    F = factorial_j1
    assert abs(extension_tail_bound(F, 0, 1) + 18 * gmpy2.log(2)) < TINY
    want = log_factorial(7) + F.mt.log_m(7) + (1 - (19 + 3)) * gmpy2.log(2)
    assert abs(extension_tail_bound(F, 7, 2) - want) < TINY
    with pytest.raises(ValueError):
        extension_tail_bound(F, 0, 3)


def test_tail_bound_below_lower_bound_slack(factorial_j1):
    F = factorial_j1
    n = 19
    s = s_derivative(F, n, F.bricks[1].x)
    half_peak = log_factorial(n) - n * gmpy2.log(2) + F.mt.log_m(n) - gmpy2.log(2)
    excess = s.log_mag + gmpy2.log(-gmpy2.expm1(half_peak - s.log_mag))
    assert extension_tail_bound(F, n, 2) < excess


def test_taylor_single_brick():
    b = Brick.from_values(2, "0.3", "-0.5", "0.25")
    c = taylor_coeffs(single_brick_fn(b), 1)
    z = b.z
    assert abs(c[0] - 2 * b.A / 4 / z) < TINY
    assert abs(c[1] - 4 * b.A / 4 / z ** 2) < TINY


def test_taylor_factorial_build_matches_mpmath_sum(factorial_j1):
    F = factorial_j1
    c = taylor_coeffs(F, 50)
    bricks = [(b.n, dec(b.A), dec(b.x), dec(b.y)) for b in F.bricks]
    want = taylor_mp(bricks, 50)
    with mpmath.workdps(60):
        for p in range(51):
            got = mpmath.mpc(dec(c[p].real), dec(c[p].imag))
            assert abs(got - want[p]) <= mpmath.mpf("1e-20") * abs(want[p])


def test_taylor_overflow_is_reported():
    F = single_brick_fn(Brick(0, mpfr(0), mpfr("1e8"), mpfr("1e8")))
    with pytest.raises(PrecisionOverflow) as exc:
        taylor_coeffs(F, 20)
    assert exc.value.code == "precision-overflow"


def test_taylor_in_class_of_m(factorial_build):
    F = factorial_build
    c = taylor_coeffs(F, 200)
    for p in range(201):
        assert gmpy2.log(abs(c[p])) <= (p + 1) * gmpy2.log(2) + F.m.log_m(p)


@pytest.mark.parametrize("build", ["factorial_build", "widened_build_j1"])
def test_global_and_halfline_bounds_on_grid(request, build):
    F = request.getfixturevalue(build)
    xs = sweep_grid(F)
    rows = derivative_sweep(F, range(31), xs)
    for p, x, lm, bound, slack in rows:
        assert slack >= 0
        if x >= 0:
            assert lm <= halfline_bound_log(F, p)


def test_sweep_order_independent_of_workers(factorial_build):
    xs = sweep_grid(factorial_build, per_brick=3)
    a = derivative_sweep(factorial_build, range(5), xs, workers=1)
    b = derivative_sweep(factorial_build, range(5), xs, workers=4)
    assert a == b


def test_log_domain_at_huge_order():
    b = Brick.from_values(10 ** 6, "1e-3", "-1e-6", "1e-7")
    v = brick_derivative(b, 10 ** 6, b.x)
    want = (log_factorial(10 ** 6) + gmpy2.log(mpfr("1e-3")) - 10 ** 6 * gmpy2.log(2)
            + (10 ** 6 + 1) * gmpy2.log(mpfr("1e7")))
    assert abs(v.log_mag - want) <= mpfr("1e-60") * abs(want)
    assert isinstance(v, LogComplex)


def test_global_bound_is_closed_form(factorial_build):
    F = factorial_build
    assert abs(global_bound_log(F, 10) - gmpy2.log(mpfr(math.factorial(10) * 2 ** 11
                                                        * math.factorial(10)))) < TINY
