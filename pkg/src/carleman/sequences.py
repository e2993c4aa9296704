"""Log-convex growth sequences given by ratio generators, and their widening.

A sequence m_0 = 1, m_n = alpha_1 ... alpha_n is described by its ratios
alpha_j = m_j / m_{j-1}.  Terms are kept as natural logarithms.

Storage is two-tiered.  Indices up to ``DENSE_LIMIT`` are memoized one by
one.  Beyond that, closed-form chains (constant/factorial/log families and
their widenings) keep a checkpoint every ``STRIDE`` indices, filled by the
block scanner in :mod:`carleman._scan`; any far index is reached by stepping
at most ``STRIDE - 1`` terms from the nearest checkpoint.
"""
from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import gmpy2
from gmpy2 import mpfr

from carleman import _scan
from carleman._numeric import DEFAULT_PREC, dec, to_mpfr, workprec
from carleman.errors import InvalidSequence, WideningDegenerate

DENSE_LIMIT = 1 << 17
STRIDE = 4096
DEFAULT_HORIZON = 1 << 25
DEFAULT_N_MAX = 10_000
ALPHA_THRESHOLD = 4
# far checkpoints are filled this many blocks per scan call
_BATCH = 64
_FAR_MEMO = 256
# relative growth of mu over the last doubling window below which the
# widening is reported as degenerate (when no analytic verdict exists)
DEGENERATE_RTOL = 1e-3

BASE_FAMILIES = ("constant", "factorial", "log", "custom")
_DEFAULT_PARAMS = {"constant": {"ratio": "1"}, "factorial": {"scale": "1"},
                   "log": {"shift": "e"}, "custom": {}}


class Term(NamedTuple):
    n: int
    log_m: object
    ratio: object
    log_ratio: object


def _as_str(v):
    return v if isinstance(v, str) else repr(v) if isinstance(v, float) else str(v)


class GrowthSequence:
    """A positive sequence with m_0 = 1 given by its ratio generator.

    Built-in families: ``constant`` (alpha_j = ratio), ``factorial``
    (alpha_j = scale * j), ``log`` (alpha_j = log(j + shift)) and ``custom``
    (explicit finite ratio table).
    """

    family_id: str

    def __init__(self, family="log", params=None, table=None, *, prec=None, horizon=None):
        if family not in BASE_FAMILIES:
            raise InvalidSequence(f"unknown family {family!r}")
        self.family_id = family
        self.prec = int(prec or DEFAULT_PREC)
        self.params = dict(_DEFAULT_PARAMS[family])
        self.params.update({k: _as_str(v) for k, v in (params or {}).items()})
        self._lock = threading.RLock()
        with workprec(self.prec):
            if family == "custom":
                if not table:
                    raise InvalidSequence("custom family needs a non-empty ratio table")
                self.table = [_as_str(v) for v in table]
                self._table = [to_mpfr(v) for v in self.table]
                self._param = None
            else:
                self.table = None
                key = {"constant": "ratio", "factorial": "scale", "log": "shift"}[family]
                self._param = to_mpfr(self.params[key])
                if not self._param > 0:
                    raise InvalidSequence(f"{family} parameter must be positive")
        if family == "custom":
            self.horizon = len(self.table) if horizon is None else min(int(horizon), len(self.table))
        else:
            self.horizon = int(horizon or DEFAULT_HORIZON)
        self._init_storage()

    def _init_storage(self):
        with workprec(self.prec):
            self._ratio = [None]
            self._log_ratio = [None]
            self._log_m = [mpfr(0)]
        self._far = []  # chain states at DENSE_LIMIT + i * STRIDE
        self._far_terms = {}  # recently requested far Terms

    # -- structure -------------------------------------------------------

    @property
    def chain(self):
        """Levels from the base family up to this sequence."""
        return [self]

    @property
    def depth(self):
        return len(self.chain) - 1

    @property
    def base(self):
        return self.chain[0]

    @property
    def far_capable(self):
        return self.base.family_id != "custom"

    def spec(self):
        d = {"family": self.family_id, "params": dict(self.params)}
        if self.table is not None:
            d["table"] = list(self.table)
            d["params"] = {}
        return d

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r}, prec={self.prec})"

    def _closed_ratio(self, k):
        f = self.family_id
        if f == "constant":
            return +self._param
        if f == "factorial":
            return self._param * k
        if f == "log":
            return gmpy2.log(k + self._param)
        if k > len(self._table):
            raise InvalidSequence(f"index {k} beyond custom table of length {len(self._table)}")
        return +self._table[k - 1]

    # -- dense memo ------------------------------------------------------

    def _dense_cap(self):
        return DENSE_LIMIT if self.far_capable else len(self.table)

    def _extend(self, n):
        if n < len(self._log_m):
            return
        with self._lock, workprec(self.prec):
            ratios, lratios, logm = self._ratio, self._log_ratio, self._log_m
            acc = logm[-1]
            for k in range(len(logm), n + 1):
                r = self._closed_ratio(k)
                if not r > 0:
                    raise InvalidSequence(f"non-positive ratio at j={k}")
                lr = gmpy2.log(r)
                acc = acc + lr
                ratios.append(r)
                lratios.append(lr)
                logm.append(acc)

    def _dense_term(self, n):
        self._extend(n)
        return Term(n, self._log_m[n], self._ratio[n], self._log_ratio[n])

    # -- far region ------------------------------------------------------

    def _anchor_state(self):
        """Chain state at DENSE_LIMIT from the dense memos."""
        a = DENSE_LIMIT
        self._extend(a)
        return [lvl._dense_state(a) for lvl in self.chain]

    def _dense_state(self, n):
        return (self._log_m[n], None, None)

    def _ensure_far(self, n):
        """Fill checkpoints up to the first one at or beyond index ``n``."""
        need = (n - DENSE_LIMIT + STRIDE - 1) // STRIDE
        if len(self._far) > need:
            return
        with self._lock, workprec(self.prec):
            if not self._far:
                self._far.append(self._anchor_state())
            base = self.base
            while len(self._far) <= need:
                nblocks = min(_BATCH, need + 1 - len(self._far))
                state = self._far[-1]
                k0 = DENSE_LIMIT + (len(self._far) - 1) * STRIDE + 1
                mu0 = [state[i][1] for i in range(1, self.depth + 1)]
                try:
                    rows = _scan.scan(base.family_id, base._param, self.depth,
                                      k0, STRIDE, nblocks, mu0)
                except ValueError as exc:
                    raise InvalidSequence(str(exc)) from None
                for row in rows:
                    new = []
                    for i, (dl, dmu, ds) in enumerate(row):
                        L, mu, S = state[i]
                        if i == 0:
                            new.append((L + dl, None, None))
                        else:
                            new.append((L + dl, mu + dmu, S + ds))
                    self._far.append(new)
                    state = new

    def _step(self, state, k):
        """Advance a chain state from index k-1 to k; returns (state, ratio, log_ratio)."""
        r = self.base._closed_ratio(k)
        lr = gmpy2.log(r)
        new = [(state[0][0] + lr, None, None)]
        for i in range(1, self.depth + 1):
            L, mu, S = state[i]
            mu = mu + 1 / (k * r)
            S = S + gmpy2.log(mu)
            r = r * gmpy2.sqrt(mu)
            lr = gmpy2.log(r)
            new.append((L + lr, mu, S))
        return new, r, lr

    def _ratio_from_state(self, state, n):
        r = self.base._closed_ratio(n)
        for i in range(1, self.depth + 1):
            r = r * gmpy2.sqrt(state[i][1])
        return r

    def _far_state(self, n):
        """Chain state at a far index n (> DENSE_LIMIT)."""
        idx = (n - DENSE_LIMIT) // STRIDE
        self._ensure_far(DENSE_LIMIT + idx * STRIDE)
        state = self._far[idx]
        r = lr = None
        for k in range(DENSE_LIMIT + idx * STRIDE + 1, n + 1):
            state, r, lr = self._step(state, k)
        if r is None:
            r = self._ratio_from_state(state, n)
            lr = gmpy2.log(r)
        return state, r, lr

    # -- public accessors ------------------------------------------------

    def term(self, n) -> Term:
        n = int(n)
        if n < 0:
            raise ValueError("index must be non-negative")
        if n <= self._dense_cap():
            return self._dense_term(n)
        hit = self._far_terms.get(n)
        if hit is not None:
            return hit
        with workprec(self.prec):
            state, r, lr = self._far_state(n)
            t = Term(n, state[-1][0], r, lr)
        with self._lock:
            if len(self._far_terms) >= _FAR_MEMO:
                self._far_terms.pop(next(iter(self._far_terms)))
            self._far_terms[n] = t
        return t

    def log_m(self, n):
        """log m_n."""
        n = int(n)
        if n < len(self._log_m):
            return self._log_m[n]
        return self.term(n).log_m

    def ratio(self, j):
        """alpha_j = m_j / m_{j-1} for j >= 1."""
        if j < 1:
            raise ValueError("ratio index starts at 1")
        if j < len(self._ratio):
            return self._ratio[j]
        return self.term(j).ratio

    b = ratio

    def log_ratio(self, j):
        if j < 1:
            raise ValueError("ratio index starts at 1")
        if j < len(self._log_ratio):
            return self._log_ratio[j]
        return self.term(j).log_ratio

    def ensure(self, n):
        """Precompute memo/checkpoints through index n (before sharing across threads)."""
        n = min(int(n), self.horizon) if not self.far_capable else int(n)
        if n <= self._dense_cap():
            self._extend(n)
        else:
            self._extend(DENSE_LIMIT)
            self._ensure_far(n)

    def iter_terms(self, lo, hi):
        """Yield Terms for lo <= n <= hi in order (stepping through far blocks)."""
        cap = self._dense_cap()
        n = max(int(lo), 0)
        while n <= hi and n <= cap:
            yield self._dense_term(n)
            n += 1
        if n > hi:
            return
        with workprec(self.prec):
            state, r, lr = self._far_state(n)
            yield Term(n, state[-1][0], r, lr)
            for k in range(n + 1, hi + 1):
                state, r, lr = self._step(state, k)
                yield Term(k, state[-1][0], r, lr)

    def first_index(self, pred: Callable[[Term], bool], start=1) -> Optional[int]:
        """Smallest n in [start, horizon] with ``pred(term(n))`` true, or None.

        ``pred`` must be monotone in n (false ... false, true ... true).
        """
        start = max(int(start), 1)
        horizon = self.horizon
        if start > horizon:
            return None
        dense_hi = min(horizon, self._dense_cap())
        if start <= dense_hi:
            found = self._gallop(pred, start, dense_hi)
            if found is not None:
                return found
            if dense_hi >= horizon or not self.far_capable:
                return None
        return self._far_search(pred, max(start, dense_hi + 1), horizon)

    def _gallop(self, pred, lo, hi):
        prev, step, probe = lo - 1, 1, lo
        while True:
            probe = min(probe, hi)
            if pred(self._dense_term(probe)):
                break
            if probe == hi:
                return None
            prev, probe, step = probe, probe + step, step * 2
        a, b = prev + 1, probe  # pred false below a, true at b
        while a < b:
            mid = (a + b) // 2
            if pred(self._dense_term(mid)):
                b = mid
            else:
                a = mid + 1
        return b

    def _far_search(self, pred, lo, hi):
        with workprec(self.prec):
            i = max(1, (lo - DENSE_LIMIT) // STRIDE)
            while True:
                c = DENSE_LIMIT + i * STRIDE
                self._ensure_far(min(c, hi + STRIDE))
                if c >= hi:
                    break
                st = self._far[i]
                if pred(Term(c, st[-1][0], *self._ratio_and_log(st, c))):
                    break
                i += 1
            prev = DENSE_LIMIT + (i - 1) * STRIDE
            walk_from = max(prev + 1, lo)
            for t in self.iter_terms(walk_from, hi):
                if pred(t):
                    return t.n
            return None

    def _ratio_and_log(self, state, n):
        r = self._ratio_from_state(state, n)
        return r, gmpy2.log(r)


class WidenedSequence(GrowthSequence):
    """m~_j = beta_j m~_{j-1} with beta_j = alpha_j sqrt(mu_j), mu_j = sum_{k<=j} 1/(k alpha_k)."""

    def __init__(self, base: GrowthSequence, *, horizon=None):
        self._base_seq = base
        self.family_id = "widened"
        self.prec = base.prec
        self.params = {}
        self.table = None
        self._param = None
        self._lock = threading.RLock()
        self.horizon = min(int(horizon), base.horizon) if horizon else base.horizon
        self._init_storage()
        with workprec(self.prec):
            self._mu = [mpfr(0)]
            self._sum_log_mu = [mpfr(0)]
        self.record = WideningRecord(self)

    @property
    def chain(self):
        return self._base_seq.chain + [self]

    @property
    def parent(self):
        return self._base_seq

    def spec(self):
        return {"family": "widened", "base": self._base_seq.spec()}

    def _dense_cap(self):
        return self._base_seq._dense_cap()

    def _dense_state(self, n):
        return (self._log_m[n], self._mu[n], self._sum_log_mu[n])

    def _extend(self, n):
        if n < len(self._log_m):
            return
        parent = self._base_seq
        parent._extend(n)
        with self._lock, workprec(self.prec):
            alpha = parent._ratio
            mus, slm = self._mu, self._sum_log_mu
            ratios, lratios, logm = self._ratio, self._log_ratio, self._log_m
            mu, S, acc = mus[-1], slm[-1], logm[-1]
            for k in range(len(logm), n + 1):
                a = alpha[k]
                mu = mu + 1 / (k * a)
                S = S + gmpy2.log(mu)
                beta = a * gmpy2.sqrt(mu)
                lb = gmpy2.log(beta)
                acc = acc + lb
                mus.append(mu)
                slm.append(S)
                ratios.append(beta)
                lratios.append(lb)
                logm.append(acc)

    def mu_state(self, n):
        """(mu_n, sum_{k<=n} log mu_k)."""
        n = int(n)
        if n <= self._dense_cap():
            self._extend(n)
            return self._mu[n], self._sum_log_mu[n]
        with workprec(self.prec):
            state, _, _ = self._far_state(n)
            return state[-1][1], state[-1][2]


@dataclass
class WideningRecord:
    """Bookkeeping of a widening: mu_j, beta_j and the ratio identity."""

    seq: WidenedSequence
    degenerate: bool = False
    degenerate_reason: str = ""

    def mu(self, j):
        return self.seq.mu_state(j)[0]

    def beta(self, j):
        return self.seq.ratio(j)

    def sum_log_mu(self, j):
        return self.seq.mu_state(j)[1]

    def log_growth(self, j):
        """log(m~_j / m_j) from the two memoized sequences."""
        return self.seq.log_m(j) - self.seq.parent.log_m(j)

    def identity_residual(self, j):
        """|log(m~_j/m_j) - (1/2) sum log mu_k|, relative to the larger side."""
        with workprec(self.seq.prec):
            lhs = self.log_growth(j)
            rhs = self.sum_log_mu(j) / 2
            scale = max(abs(lhs), abs(rhs), mpfr(1))
            return abs(lhs - rhs) / scale

    def partial_sum_slacks(self, j_max):
        """Directed-rounding lower bounds of sum_{k<=j} 1/(k beta_k) - sqrt(mu_j).

        Returns ``(identity_residual_at_1, slacks)`` where ``slacks[j]`` for
        j >= 2 is a certified lower bound (rounding toward -inf/+inf chosen so
        the true slack is at least the returned value).  At j = 1 both sides
        coincide exactly (1/(alpha_1 sqrt(mu_1)) = sqrt(mu_1)), so that entry
        is an identity residual instead.
        """
        lo, hi = ratio_enclosures(self.seq, j_max)
        prec = self.seq.prec
        down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
        up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
        mu_hi = mpfr(0)
        base_lo, base_hi = ratio_enclosures(self.seq.parent, j_max)
        total = mpfr(0)
        slacks = [None, None]
        for k in range(1, j_max + 1):
            mu_hi = up.add(mu_hi, up.div(1, down.mul(k, base_lo[k])))
            term = down.div(1, up.mul(k, hi[k]))
            total = down.add(total, term)
            if k >= 2:
                slacks.append(down.sub(total, up.sqrt(mu_hi)))
        with workprec(prec):
            a1 = self.seq.parent.ratio(1)
            mu1 = 1 / a1
            ident = abs(1 / (a1 * gmpy2.sqrt(mu1)) - gmpy2.sqrt(mu1)) / gmpy2.sqrt(mu1)
        return ident, slacks


def ratio_enclosures(seq: GrowthSequence, n):
    """Lists (lo, hi) with lo[k] <= ratio_k <= hi[k] for 1 <= k <= n (directed rounding)."""
    prec = seq.prec
    down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    if isinstance(seq, WidenedSequence):
        blo, bhi = ratio_enclosures(seq.parent, n)
        lo, hi = [None], [None]
        mlo = mhi = mpfr(0)
        for k in range(1, n + 1):
            mlo = down.add(mlo, down.div(1, up.mul(k, bhi[k])))
            mhi = up.add(mhi, up.div(1, down.mul(k, blo[k])))
            lo.append(down.mul(blo[k], down.sqrt(mlo)))
            hi.append(up.mul(bhi[k], up.sqrt(mhi)))
        return lo, hi
    fam = seq.family_id

    def parse(ctx, s):
        with ctx:
            return to_mpfr(s)

    lo, hi = [None], [None]
    if fam == "custom":
        if n > len(seq.table):
            raise InvalidSequence(f"index {n} beyond custom table")
        for s in seq.table[:n]:
            lo.append(parse(down, s))
            hi.append(parse(up, s))
        return lo, hi
    key = {"constant": "ratio", "factorial": "scale", "log": "shift"}[fam]
    p_lo, p_hi = parse(down, seq.params[key]), parse(up, seq.params[key])
    for k in range(1, n + 1):
        if fam == "constant":
            lo.append(p_lo)
            hi.append(p_hi)
        elif fam == "factorial":
            lo.append(down.mul(p_lo, k))
            hi.append(up.mul(p_hi, k))
        else:
            lo.append(down.log(down.add(p_lo, k)))
            hi.append(up.log(up.add(p_hi, k)))
    return lo, hi


# -- analytic verdicts ----------------------------------------------------

def family_verdict(seq: GrowthSequence):
    """Hardcoded analytic facts for built-in families (None when unknown).

    ``quasi_analytic``: divergence of sum m_k / ((k+1) m_{k+1}).
    ``alpha_divergent``: alpha_j -> infinity (class strictly wider than analytic).
    """
    fam = seq.family_id
    if fam == "constant":
        return {"quasi_analytic": True, "alpha_divergent": False}
    if fam == "factorial":
        return {"quasi_analytic": False, "alpha_divergent": True}
    if fam == "log":
        # integral test: sum 1/(k log(k + c)) diverges
        return {"quasi_analytic": True, "alpha_divergent": True}
    if fam == "widened":
        parent = family_verdict(seq.parent)
        qa = parent["quasi_analytic"]
        ad = None
        if parent["alpha_divergent"] or qa:
            ad = True
        elif parent["alpha_divergent"] is False and qa is False:
            ad = None
        return {"quasi_analytic": qa, "alpha_divergent": ad}
    return {"quasi_analytic": None, "alpha_divergent": None}


# -- operations -----------------------------------------------------------

def seq_term(seq: GrowthSequence, n):
    """log m_n (memoized)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return seq.log_m(n)


@dataclass
class SequenceDiagnostics:
    horizon: int
    log_convex_ok: bool
    first_violation: Optional[int]
    root_ratio_sup: object
    root_ratio_sup_index: int
    root_ratio_samples: list
    qa_partial_sums: list
    alpha_divergence: bool
    alpha_threshold: float
    alpha_at_horizon: object
    family_verdict: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "horizon": self.horizon,
            "log_convex_ok": self.log_convex_ok,
            "first_violation": self.first_violation,
            "root_ratio_sup": dec(self.root_ratio_sup),
            "root_ratio_sup_index": self.root_ratio_sup_index,
            "root_ratio_samples": [[j, dec(v)] for j, v in self.root_ratio_samples],
            "qa_partial_sums": [[j, dec(v)] for j, v in self.qa_partial_sums],
            "alpha_divergence": self.alpha_divergence,
            "alpha_threshold": self.alpha_threshold,
            "alpha_at_horizon": dec(self.alpha_at_horizon),
            "family_verdict": self.family_verdict,
        }


def _sample_points(n_max):
    pts = set()
    p = 1
    while p <= n_max:
        pts.add(p)
        p *= 2
    pts.add(n_max)
    return pts


def seq_validate(seq: GrowthSequence, n_max=DEFAULT_N_MAX, alpha_threshold=ALPHA_THRESHOLD):
    """Horizon diagnostics for conditions on the sequence (never claims about the tail)."""
    n_max = int(n_max)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    samples = _sample_points(n_max)
    with workprec(seq.prec):
        first_violation = None
        prev = None
        qa = mpfr(0)
        qa_samples = []
        best, best_j = mpfr("-inf"), 1
        rr_samples = []
        last_ratio = None
        for t in seq.iter_terms(1, n_max):
            j, r = t.n, t.ratio
            if not r > 0:
                raise InvalidSequence(f"non-positive ratio at j={j}")
            if prev is not None and r < prev and first_violation is None:
                first_violation = j
            # m_{j-1} / (j m_j)
            qa = qa + 1 / (j * r)
            if j in samples:
                qa_samples.append((j, qa))
            if j >= 2:
                # running sup of (m_j / m_{j-1})^(1/(j-1))
                v = t.log_ratio / (j - 1)
                if v > best:
                    best, best_j = v, j - 1
                if j - 1 in samples or j == n_max:
                    rr_samples.append((j - 1, gmpy2.exp(best)))
            prev = r
            last_ratio = r
        return SequenceDiagnostics(
            horizon=n_max,
            log_convex_ok=first_violation is None,
            first_violation=first_violation,
            root_ratio_sup=gmpy2.exp(best),
            root_ratio_sup_index=best_j,
            root_ratio_samples=rr_samples,
            qa_partial_sums=qa_samples,
            alpha_divergence=bool(last_ratio > alpha_threshold),
            alpha_threshold=alpha_threshold,
            alpha_at_horizon=last_ratio,
            family_verdict=family_verdict(seq),
        )


def wep_widen(seq: GrowthSequence, n_max=None, *, warn=True) -> WidenedSequence:
    """Widen ``seq``: beta_j = alpha_j sqrt(mu_j).

    The input must be log-convex up to ``n_max``.  A stalled mu (input looks
    non-quasi-analytic) is flagged on ``record`` and warned about.
    """
    n_max = int(n_max or min(DEFAULT_N_MAX, seq.horizon))
    diag = seq_validate(seq, n_max)
    if not diag.log_convex_ok:
        raise InvalidSequence(f"input not log-convex (first violation at j={diag.first_violation})")
    out = WidenedSequence(seq)
    rec = out.record
    qa = diag.family_verdict.get("quasi_analytic")
    if qa is False:
        rec.degenerate = True
        rec.degenerate_reason = "input family is not quasi-analytic (mu_j converges)"
    elif qa is None:
        with workprec(seq.prec):
            mu_end = rec.mu(n_max)
            mu_half = rec.mu(max(1, n_max // 2))
            growth = (mu_end - mu_half) / mu_end
        if growth < DEGENERATE_RTOL:
            rec.degenerate = True
            rec.degenerate_reason = (f"mu grew by a relative {float(growth):.3g} over "
                                     f"[{n_max // 2}, {n_max}]")
    if rec.degenerate and warn:
        warnings.warn(WideningDegenerate(f"widening-degenerate: {rec.degenerate_reason}"),
                      stacklevel=2)
    return out


@dataclass
class InclusionReport:
    n_max: int
    inclusion_sup: object
    inclusion_sup_index: int
    growth_samples: list
    growth_sup: object
    growth_sup_index: int
    growth_monotone: bool

    def to_json(self):
        return {
            "n_max": self.n_max,
            "inclusion_sup": dec(self.inclusion_sup),
            "inclusion_sup_index": self.inclusion_sup_index,
            "growth_samples": [[n, dec(v)] for n, v in self.growth_samples],
            "growth_sup": dec(self.growth_sup),
            "growth_sup_index": self.growth_sup_index,
            "growth_monotone": self.growth_monotone,
        }


def inclusion_diag(m1: GrowthSequence, m2: GrowthSequence, n_max=DEFAULT_N_MAX):
    """sup_n (m1_n/m2_n)^(1/n) and the sampled growth (m2_n/m1_n)^(1/n)."""
    n_max = int(n_max)
    samples = _sample_points(n_max)
    prec = max(m1.prec, m2.prec)
    with workprec(prec):
        inc, inc_n = mpfr("-inf"), 1
        gro, gro_n = mpfr("-inf"), 1
        growth = []
        for t1, t2 in zip(m1.iter_terms(1, n_max), m2.iter_terms(1, n_max)):
            n = t1.n
            d = (t1.log_m - t2.log_m) / n
            if d > inc:
                inc, inc_n = d, n
            if -d > gro:
                gro, gro_n = -d, n
            if n in samples:
                growth.append((n, gmpy2.exp(-d)))
        mono = all(b[1] >= a[1] for a, b in zip(growth, growth[1:]))
        return InclusionReport(n_max, gmpy2.exp(inc), inc_n, growth, gmpy2.exp(gro), gro_n, mono)


def sequence_from_spec(spec, prec=None, horizon=None):
    """Build a sequence from its JSON spec (``widened`` specs nest a ``base``)."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidSequence("sequence spec must be an object with a 'family'")
    fam = spec["family"]
    if fam == "widened":
        base = sequence_from_spec(spec["base"], prec=prec, horizon=horizon)
        return WidenedSequence(base)
    return GrowthSequence(fam, spec.get("params") or {}, spec.get("table"),
                          prec=prec, horizon=horizon)


def log_factorial(n):
    """log n! at the working precision."""
    return gmpy2.lgamma(n + 1)[0]


__all__ = [
    "GrowthSequence", "WidenedSequence", "WideningRecord", "SequenceDiagnostics",
    "InclusionReport", "Term", "seq_term", "seq_validate", "wep_widen", "inclusion_diag",
    "family_verdict", "ratio_enclosures", "sequence_from_spec", "log_factorial",
    "DENSE_LIMIT", "STRIDE", "DEFAULT_HORIZON", "DEFAULT_N_MAX",
]
