"""Command line: ``carleman <subcommand> [--config run.json] [overrides]``.

Exit codes: 0 pass, 1 check failure, 2 configuration error,
3 construction or horizon error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

import gmpy2
from gmpy2 import mpfr

from carleman import _scan
from carleman._numeric import dec, workprec
from carleman.associated import AssociatedFunction
from carleman.config import RunConfig, parse_config
from carleman.construction import build_counterexample
from carleman.errors import CarlemanError, ConfigInvalid, SubsequenceHorizon, WideningDegenerate
from carleman.evaluate import prepare_taylor, taylor_coeffs
from carleman.formal import class_envelope_diag
from carleman.sequences import seq_validate, sequence_from_spec, wep_widen
from carleman.verify import (Tolerances, bounds_rows, nonmembership_certificate, run_all,
                             taylor_envelope_check)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_CONSTRUCTION = 0, 1, 2, 3
FORMAL_PREC_CAP = 4096
LAGRANGE_ORDER = 30


class StageError(Exception):
    def __init__(self, stage, err):
        super().__init__(f"{stage}: {err}")
        self.stage = stage
        self.err = err


# -- pipeline pieces -------------------------------------------------------

class Pipeline:
    """Lazily built objects shared by the subcommands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.warnings = []
        self.stages = {}
        self.out = Path(cfg.output_dir)
        self._M = self._N = self._K = self._F = None

    def _stage(self, name, fn):
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                result = fn()
            for w in caught:
                msg = str(w.message)
                if issubclass(w.category, WideningDegenerate) and msg not in self.warnings:
                    self.warnings.append(msg)
                    print(f"warning: {msg}", file=sys.stderr)
        except CarlemanError as err:
            self.stages[name] = "error"
            raise StageError(name, err) from None
        self.stages[name] = "ok"
        return result

    @property
    def tols(self):
        t = self.cfg.tolerances
        return Tolerances(identity=_mp(t["identity"]), inequality=_mp(t["inequality"]))

    @property
    def M(self):
        if self._M is None:
            self._M = self._stage("sequences", lambda: sequence_from_spec(
                self.cfg.M, prec=self.cfg.precision, horizon=self.cfg.horizon))
        return self._M

    @property
    def N(self):
        if self._N is None:
            if self.cfg.N == self.cfg.M:
                self._N = self.M
            else:
                self._N = self._stage("sequences", lambda: sequence_from_spec(
                    self.cfg.N, prec=self.cfg.precision, horizon=self.cfg.horizon))
        return self._N

    @property
    def K(self):
        if self._K is None:
            self._K = self._stage("widen", lambda: wep_widen(self.N, self.cfg.n_max))
        return self._K

    @property
    def F(self):
        if self._F is None:
            M, K = self.M, self.K
            self._F = self._stage("construction", lambda: build_counterexample(
                M, K, self.cfg.J, self.cfg.n_start))
        return self._F

    def sequence(self, which):
        return {"M": self.M, "N": self.N, "K": self.K}[which]

    # reports

    def validate_report(self):
        def go():
            return {name: seq_validate(seq, self.cfg.n_max, self.cfg.alpha_threshold).to_json()
                    for name, seq in (("M", self.M), ("N", self.N))}
        return self._stage("validate", go)

    def widening_report(self):
        K, n = self.K, self.cfg.n_max

        def go():
            rec = K.record
            with workprec(K.prec):
                resid = max(rec.identity_residual(j) for j in range(1, n + 1))
                ident1, slacks = rec.partial_sum_slacks(n)
                body = slacks[2:]
                worst = min(body) if body else None
                diag = seq_validate(K, n, self.cfg.alpha_threshold)
                return {
                    "n_max": n,
                    "degenerate": rec.degenerate,
                    "degenerate_reason": rec.degenerate_reason,
                    "identity_residual_max": dec(resid),
                    "partial_sum_identity_j1": dec(ident1),
                    "partial_sum_min_slack": dec(worst) if worst is not None else None,
                    "partial_sum_min_slack_j": (body.index(worst) + 2) if body else None,
                    "mu_at_n_max": dec(rec.mu(n)),
                    "widened_log_convex": diag.log_convex_ok,
                }
        return self._stage("widen", go)

    def construction_report(self):
        F = self.F
        return {"J": F.J, "subsequence": F.subseq, "n_prime": F.n_prime,
                "bricks": [b.to_json() for b in _at(F, F.bricks)]}

    def verification(self):
        F = self.F
        return self._stage("verify", lambda: run_all(
            F, self.cfg.p_max, self.cfg.workers, self.cfg.to_json(), self.tols))

    def certificate(self):
        F, N = self.F, self.N
        return self._stage("certify", lambda: nonmembership_certificate(F, N, self.tols))

    def formal(self):
        F, cfg = self.F, self.cfg
        tol = _mp(cfg.tolerances["identity"])

        def go():
            with workprec(F.prec):
                T = taylor_coeffs(F, max(cfg.P, cfg.p_max))
                env_check = taylor_envelope_check(F, T, F.m, self.tols)
                env = class_envelope_diag(T, F.m)
            Tp, w, errors, prec = prepare_taylor(F, cfg.P, tol, FORMAL_PREC_CAP, LAGRANGE_ORDER)
            worst = max(errors.values())
            with workprec(prec):
                wj = w.to_json()
                summary = {
                    "order": cfg.P,
                    "precision_used": prec,
                    "within_tolerance": bool(worst <= tol),
                    "shift": wj["shift"],
                    "Q00": wj["Q00"],
                    "c1": wj["c1"],
                    "evenness_max": wj["evenness_max"],
                    "lagrange_order": min(cfg.P, LAGRANGE_ORDER),
                    "envelope": {"sup": dec(env.sup), "sup_index": env.sup_index,
                                 "increasing": env.increasing,
                                 "unbounded_trend": env.unbounded_trend},
                }
                summary.update({k: dec(v) for k, v in errors.items()})
                series = {"order": cfg.P, "precision": prec, "taylor": Tp.to_json(),
                          "a": w.a.to_json(), "shift": wj["shift"]}
            return summary, series, env_check
        return self._stage("prepare", go)

    # writers

    def write_json(self, name, data):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return path

    def write_csv(self, name, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for r in rows:
                w.writerow(r)
        return path


def _mp(x):
    return mpfr(repr(x))


def _at(F, items):
    with workprec(F.prec):
        return list(items)


def _bounds_csv(F, p_max):
    yield ["n", "p", "slack_global", "slack_halfline"]
    for n, p, g, h in bounds_rows(F, p_max):
        yield [n, p, dec(g), dec(h)]


# -- subcommands -------------------------------------------------------------

def cmd_validate_seq(pl: Pipeline, args):
    seq = pl.sequence(args.which)
    diag = seq_validate(seq, pl.cfg.n_max, pl.cfg.alpha_threshold)
    _emit(diag.to_json())
    return EXIT_PASS if diag.log_convex_ok else EXIT_FAIL


def cmd_widen(pl: Pipeline, args):
    rep = pl.widening_report()
    rep["warnings"] = pl.warnings
    _emit(rep)
    return EXIT_PASS if rep["widened_log_convex"] else EXIT_FAIL


def cmd_phi(pl: Pipeline, args):
    A = AssociatedFunction(pl.sequence(args.which))
    with workprec(A.prec):
        n = A.segment(args.xi)
        lp = A.log_phi(args.xi)
        _emit({"xi": args.xi, "segment": n, "log_phi": dec(lp), "phi": dec(gmpy2.exp(lp))})
    return EXIT_PASS


def cmd_phi_inv(pl: Pipeline, args):
    A = AssociatedFunction(pl.sequence(args.which))
    with workprec(A.prec):
        n = A.inverse_segment(args.value)
        lx = A.log_phi_inv(args.value)
        _emit({"log_value": args.value, "segment": n, "log_xi": dec(lx), "xi": dec(gmpy2.exp(lx))})
    return EXIT_PASS


def cmd_construct(pl: Pipeline, args):
    F = pl.F
    path = pl.write_json("function.json", F.to_json())
    _emit({"subsequence": F.subseq, "function": str(path)})
    return EXIT_PASS


def cmd_verify(pl: Pipeline, args):
    F = pl.F
    pl.write_json("function.json", F.to_json())
    rep = pl.verification()
    pl.write_csv("bounds.csv", _bounds_csv(F, pl.cfg.p_max))
    data = rep.to_json()
    data["stages"] = pl.stages
    pl.write_json("report.json", data)
    _emit({"overall": rep.overall, "checks": len(rep.checks),
           "failed": [c.name for c in rep.checks if not c.passed]})
    return EXIT_PASS if rep.overall == "pass" else EXIT_FAIL


def cmd_prepare(pl: Pipeline, args):
    summary, series, env_check = pl.formal()
    pl.write_json("series.json", series)
    summary["taylor_envelope"] = env_check.to_json()
    _emit(summary)
    return EXIT_PASS if env_check.passed and summary["within_tolerance"] else EXIT_FAIL


def cmd_certify(pl: Pipeline, args):
    cert = pl.certificate()
    pl.write_csv("certificate.csv", cert.csv_rows())
    _emit(cert.to_json())
    return EXIT_PASS if cert.increasing else EXIT_FAIL


def run_pipeline(cfg: RunConfig):
    """Full pipeline; returns (exit code, report dict).  Artifacts go to ``cfg.output_dir``."""
    pl = Pipeline(cfg)
    report = {"config": cfg.to_json(), "scan_backend": _scan.BACKEND, "error": None}
    code = EXIT_PASS
    try:
        report["sequences"] = pl.validate_report()
        report["widening"] = pl.widening_report()
        try:
            F = pl.F
        except StageError as se:
            if isinstance(se.err, SubsequenceHorizon) and se.err.partial is not None:
                pl.write_json("function.json", se.err.partial.to_json())
                report["construction"] = {"partial_J": se.err.max_j,
                                          "subsequence": se.err.achieved}
            raise
        pl.write_json("function.json", F.to_json())
        report["construction"] = pl.construction_report()
        rep = pl.verification()
        pl.write_csv("bounds.csv", _bounds_csv(F, cfg.p_max))
        cert = pl.certificate()
        pl.write_csv("certificate.csv", cert.csv_rows())
        report["certificate"] = cert.to_json()
        summary, series, env_check = pl.formal()
        pl.write_json("series.json", series)
        report["formal"] = summary
        checks = rep.checks + [env_check]
        report["checks"] = [c.to_json() for c in checks]
        ok = all(c.passed for c in checks) and cert.increasing and summary["within_tolerance"]
        report["overall"] = "pass" if ok else "fail"
        code = EXIT_PASS if ok else EXIT_FAIL
    except StageError as se:
        report["overall"] = "error"
        report["error"] = {"stage": se.stage, "code": se.err.code, "message": str(se.err)}
        code = EXIT_CONSTRUCTION
    report["stages"] = pl.stages
    report["warnings"] = pl.warnings
    pl.write_json("report.json", report)
    return code, report


def cmd_run(pl: Pipeline, args):
    code, report = run_pipeline(pl.cfg)
    _emit({"overall": report["overall"], "error": report["error"],
           "output_dir": str(pl.out)})
    return code


def _emit(data):
    print(json.dumps(data, indent=2, sort_keys=True))


# -- argument handling -------------------------------------------------------

_OVERRIDES = [("precision", int), ("n_max", int), ("p_max", int), ("P", int), ("J", int),
              ("n_start", int), ("horizon", int), ("workers", int)]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    common.add_argument("--out", dest="output_dir", help="output directory")
    for name, typ in _OVERRIDES:
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ)

    p = argparse.ArgumentParser(prog="carleman", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate-seq", parents=[common], help="sequence diagnostics")
    s.add_argument("--which", choices=["M", "N", "K"], default="M")
    s.set_defaults(func=cmd_validate_seq)
    s = sub.add_parser("widen", parents=[common], help="widen N and report the widening")
    s.set_defaults(func=cmd_widen)
    s = sub.add_parser("phi", parents=[common], help="evaluate the associated function")
    s.add_argument("--which", choices=["M", "N", "K"], default="M")
    s.add_argument("--xi", required=True)
    s.set_defaults(func=cmd_phi)
    s = sub.add_parser("phi-inv", parents=[common], help="invert the associated function")
    s.add_argument("--which", choices=["M", "N", "K"], default="M")
    s.add_argument("--value", required=True, help="log phi value")
    s.set_defaults(func=cmd_phi_inv)
    for name, fn, hlp in (("construct", cmd_construct, "build the brick family"),
                          ("verify", cmd_verify, "build and run all bound checks"),
                          ("prepare", cmd_prepare, "Taylor series, inversion and preparation"),
                          ("certify", cmd_certify, "non-membership certificate"),
                          ("run", cmd_run, "full pipeline")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.set_defaults(func=fn)
    return p


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigInvalid("config", f"cannot read {args.config} ({exc.strerror})") from None
        data = parse_config(text).to_json()
    for name, _ in _OVERRIDES:
        v = getattr(args, name, None)
        if v is not None:
            data[name] = v
    if getattr(args, "output_dir", None):
        data["output_dir"] = args.output_dir
    return parse_config(data)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigInvalid as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    pl = Pipeline(cfg)
    try:
        return args.func(pl, args)
    except StageError as se:
        print(f"error: stage {se.stage}: {se.err}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except CarlemanError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
