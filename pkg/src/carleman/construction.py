"""Bricks g_n = A_n / (2^n (z_n - x)) and the finite counterexample S, f(x) = 2 S(2x).

For a brick at index n (global class M~ with breakpoints b~, half-line
class M):

* 1/y_n is the geometric midpoint of [b~_n, b~_{n+1}],
* A_n = 1 / phi~(1/y_n),
* x_n = -1/xi where phi_M(xi) = phi~(1/y_n).

Indices n_0 < n_1 < ... are chosen so that the earlier bricks are small at
order n_j and the later ones carry a 2^(-n) factor at least 2^(-3) smaller.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from carleman._numeric import dec, to_mpfr, workprec
from carleman.associated import AssociatedFunction
from carleman.errors import InvalidSequence, SubsequenceHorizon
from carleman.sequences import GrowthSequence, sequence_from_spec

# b~_{N'} must exceed SEPARATION * b~_{n_{j-1}+1}
SEPARATION = 4
MIN_GAP = 3


@dataclass(frozen=True)
class Brick:
    """One term A / (2^n (z - x)), z = x_pole + i y, stored through logs.

    ``log_inv_y`` = log(1/y) and ``log_inv_x`` = log(1/|x|) are the primary
    values; ``x``/``y`` are derived.  ``m_segment`` is the segment of phi_M
    holding 1/|x|.
    """

    n: int
    log_A: object
    log_inv_y: object
    log_inv_x: object
    m_segment: int = -1

    @property
    def y(self):
        return gmpy2.exp(-self.log_inv_y)

    @property
    def x(self):
        return -gmpy2.exp(-self.log_inv_x)

    @property
    def A(self):
        return gmpy2.exp(self.log_A)

    @property
    def z(self):
        return mpc(self.x, self.y)

    @classmethod
    def from_values(cls, n, A, x, y):
        """Brick from ordinary values (x may be 0 for hand-made test bricks)."""
        A, x, y = to_mpfr(A), to_mpfr(x), to_mpfr(y)
        if not (A > 0 and y > 0):
            raise ValueError("brick needs A > 0 and y > 0")
        lx = -gmpy2.log(abs(x)) if x != 0 else mpfr("inf")
        return _PlainBrick(int(n), gmpy2.log(A), -gmpy2.log(y), lx, -1, x)

    def to_json(self):
        return {"n": self.n, "log_A": dec(self.log_A), "x": dec(self.x), "y": dec(self.y),
                "log_inv_x": dec(self.log_inv_x), "log_inv_y": dec(self.log_inv_y),
                "m_segment": self.m_segment}


@dataclass(frozen=True)
class _PlainBrick(Brick):
    x_value: object = None

    @property
    def x(self):
        return self.x_value


def choose_y(mt: GrowthSequence, n):
    """log(1/y_n) = (log b~_n + log b~_{n+1}) / 2."""
    if n < 1:
        raise ValueError("brick index must be >= 1")
    with workprec(mt.prec):
        return (mt.log_ratio(n) + mt.log_ratio(n + 1)) / 2


def brick_params(m: GrowthSequence, mt: GrowthSequence, n) -> Brick:
    with workprec(mt.prec):
        ly = choose_y(mt, n)
        # 1/y lies in [b~_n, b~_{n+1}], where phi~ is the segment-n monomial
        v = AssociatedFunction(mt).segment_value(n, ly)
        phi_m = AssociatedFunction(m)
        k = phi_m.inverse_segment(v)
        lx = (v + m.log_m(k)) / (k + 1)
        return Brick(n, -v, ly, lx, k)


@dataclass
class SubsequenceTrace:
    indices: list
    n_prime: list  # N' found at each step (None at j = 0)


def select_subsequence(mt: GrowthSequence, J, n_start=1, *, trace=False):
    """n_0 = n_start; N' = min{k : b~_k > 4 b~_{n_{j-1}+1}}, n_j = max(2N'+1, n_{j-1}+3)."""
    if J < 0:
        raise ValueError("J must be >= 0")
    if n_start < 1:
        raise ValueError("n_start must be >= 1")
    idx, nps = [int(n_start)], [None]
    with workprec(mt.prec):
        for _ in range(J):
            prev = idx[-1]
            thresh = SEPARATION * mt.ratio(prev + 1)
            np_ = mt.first_index(lambda t: t.ratio > thresh, start=prev + 1)
            if np_ is None or max(2 * np_ + 1, prev + MIN_GAP) + 1 > mt.horizon:
                err = SubsequenceHorizon(
                    f"no N' with b~_N' > {SEPARATION} b~_{prev + 1} up to horizon {mt.horizon}"
                    f" (reached J={len(idx) - 1})", idx)
                raise err
            idx.append(max(2 * np_ + 1, prev + MIN_GAP))
            nps.append(np_)
    return SubsequenceTrace(idx, nps) if trace else idx


@dataclass
class CounterexampleFn:
    """Finite brick sum S over the chosen indices, reported as f(x) = 2 S(2x)."""

    m: GrowthSequence
    mt: GrowthSequence
    subseq: list
    bricks: list
    n_prime: list = field(default_factory=list)
    scaled: bool = True
    _rebuilt: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def J(self):
        return len(self.subseq) - 1

    @property
    def prec(self):
        return self.mt.prec

    def at_precision(self, bits):
        """The same construction (same indices) recomputed at ``bits`` of precision."""
        bits = int(bits)
        if bits == self.prec:
            return self
        if bits not in self._rebuilt:
            m = sequence_from_spec(self.m.spec(), prec=bits, horizon=self.m.horizon)
            mt = m if self.mt is self.m else \
                sequence_from_spec(self.mt.spec(), prec=bits, horizon=self.mt.horizon)
            if all(b.m_segment >= 0 for b in self.bricks):
                bricks = [brick_params(m, mt, b.n) for b in self.bricks]
            else:
                with workprec(bits):
                    bricks = [Brick.from_values(b.n, b.A, b.x, b.y) for b in self.bricks]
            self._rebuilt[bits] = CounterexampleFn(m, mt, list(self.subseq), bricks,
                                                   list(self.n_prime), self.scaled)
        return self._rebuilt[bits]

    def separation_ok(self):
        """Recheck b~_{N'} > 4 b~_{n_{j-1}+1}, n_j > 2N' and the gap rule."""
        with workprec(self.prec):
            for j in range(1, len(self.subseq)):
                prev, cur, np_ = self.subseq[j - 1], self.subseq[j], self.n_prime[j]
                if cur - prev < MIN_GAP or cur <= 2 * np_:
                    return False
                if not self.mt.ratio(np_) > SEPARATION * self.mt.ratio(prev + 1):
                    return False
        return True

    def to_json(self):
        return {
            "M": self.m.spec(),
            "M_tilde": self.mt.spec(),
            "precision": self.prec,
            "subsequence": list(self.subseq),
            "n_prime": list(self.n_prime),
            "scaling": "f(x) = 2 S(2x)" if self.scaled else "S",
            "bricks": [b.to_json() for b in self.bricks],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data, horizon=None):
        prec = int(data["precision"])
        m = sequence_from_spec(data["M"], prec=prec, horizon=horizon)
        mt = m if data["M_tilde"] == data["M"] else \
            sequence_from_spec(data["M_tilde"], prec=prec, horizon=horizon)
        with workprec(prec):
            bricks = [Brick(b["n"], to_mpfr(b["log_A"]), to_mpfr(b["log_inv_y"]),
                            to_mpfr(b["log_inv_x"]), int(b.get("m_segment", -1)))
                      for b in data["bricks"]]
        return cls(m, mt, list(data["subsequence"]), bricks, list(data.get("n_prime", [])),
                   data.get("scaling", "") != "S")


def single_brick_fn(brick: Brick, m=None, mt=None, prec=None):
    """A CounterexampleFn holding one hand-made brick (for evaluation tests)."""
    m = m or GrowthSequence("constant", prec=prec)
    return CounterexampleFn(m, mt or m, [brick.n], [brick], [None])


def build_counterexample(m: GrowthSequence, mt: GrowthSequence, J, n_start=1) -> CounterexampleFn:
    """Select n_0..n_J and build one brick per index.

    On a horizon failure the raised SubsequenceHorizon carries the function
    built on the reachable indices as ``partial``.
    """
    if m.prec != mt.prec:
        raise InvalidSequence("M and M~ must share a precision")
    try:
        tr = select_subsequence(mt, J, n_start, trace=True)
    except SubsequenceHorizon as err:
        tr = select_subsequence(mt, err.max_j, n_start, trace=True)
        err.partial = _assemble(m, mt, tr)
        raise
    return _assemble(m, mt, tr)


def _assemble(m, mt, tr):
    bricks = [brick_params(m, mt, n) for n in tr.indices]
    fn = CounterexampleFn(m, mt, tr.indices, bricks, tr.n_prime)
    if not fn.separation_ok():
        raise InvalidSequence("subsequence separation failed on recheck")
    return fn


__all__ = ["Brick", "CounterexampleFn", "SubsequenceTrace", "choose_y", "brick_params",
           "select_subsequence", "build_counterexample", "single_brick_fn"]
