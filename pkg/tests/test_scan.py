import os
import subprocess
import sys

import gmpy2
import pytest
from gmpy2 import mpfr

from carleman import _scan

compiled_only = pytest.mark.skipif("compiled" not in _scan.available_backends(),
                                   reason="compiled kernel not built")


def _mu0(depth, value="1.75"):
    return [mpfr(value) * (i + 1) for i in range(depth)]


@compiled_only
@pytest.mark.parametrize("kind, param", [("constant", mpfr("1.5")), ("factorial", mpfr(1)),
                                         ("log", gmpy2.exp(1)), ("log", mpfr("0.5"))])
@pytest.mark.parametrize("depth", [0, 1, 2])
def test_backends_agree(kind, param, depth):
    # starts below and above the kernel's exact-log cutoff
    for k0 in (3, 20_000):
        a = _scan.scan(kind, param, depth, k0, 97, 3, _mu0(depth), backend="compiled")
        b = _scan.scan(kind, param, depth, k0, 97, 3, _mu0(depth), backend="python")
        for row_a, row_b in zip(a, b):
            for la, lb in zip(row_a, row_b):
                for x, y in zip(la, lb):
                    assert abs(x - y) <= mpfr("1e-28") * max(abs(y), 1)


@pytest.mark.parametrize("backend", _scan.available_backends())
def test_nonpositive_ratio_raises(backend):
    with pytest.raises(ValueError):
        _scan.scan("constant", mpfr(-1), 0, 5, 4, 1, [], backend=backend)


def test_block_sums_match_direct_logs():
    rows = _scan.scan("factorial", mpfr(1), 0, 1, 10, 2, [], backend="python")
    assert abs(rows[0][0][0] - gmpy2.lgamma(11)[0]) < mpfr("1e-70")
    assert abs(rows[0][0][0] + rows[1][0][0] - gmpy2.lgamma(21)[0]) < mpfr("1e-70")


def test_unknown_backend_falls_back_cleanly():
    if "compiled" in _scan.available_backends():
        pytest.skip("compiled kernel present")
    with pytest.raises(RuntimeError):
        _scan.scan("log", gmpy2.exp(1), 0, 1, 4, 1, [], backend="compiled")


def test_pure_python_switch():
    env = dict(os.environ, CARLEMAN_PURE_PYTHON="1")
    code = ("from carleman import _scan, sequences as s; import gmpy2\n"
            "print(_scan.BACKEND)\n"
            "gmpy2.set_context(gmpy2.context(precision=256))\n"
            "dense = s.WidenedSequence(s.GrowthSequence('log')).log_m(1000)\n"
            "s.DENSE_LIMIT = 256; s.STRIDE = 16\n"
            "F = s.WidenedSequence(s.GrowthSequence('log'))\n"
            "print(F._far_state(1000) is not None, abs(F.log_m(1000) / dense - 1) < 1e-60)\n")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                          text=True, check=True)
    assert proc.stdout.split() == ["python", "True", "True"]
