"""Command-line front end: ``beatty-ps <command> ...``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error,
3 a floor/comparison could not be certified (PrecisionExhausted).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from . import __version__
from . import diophantine as dio
from . import expsums as es
from . import harmonic as hm
from . import primes as pr
from . import suite as st
from . import vaughan as vg
from .errors import BeattyPSError, PrecisionExhausted
from .reals import RealSpec, precision_budget
from .sequences import BeattyParams, PSParams, beatty_contains, beatty_term, ps_indicator, ps_term

SCHEMA_VERSION = 1
THREADS_ENV = "BPS_THREADS"
TIMING_KEYS = frozenset({"elapsed_ms", "elapsed_s"})

BOOLEAN_FLAGS = frozenset({"coefficients"})
COMMANDS = ("seq", "count", "verify", "discrepancy", "harmonic", "vaughan", "expsum", "suite")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsing


def parse_int(text: str) -> int:
    """Integers, also in forms like 1e7 or 10**6."""
    t = str(text).strip().replace("_", "")
    if "**" in t:
        b, e = t.split("**", 1)
        return parse_int(b) ** parse_int(e)
    try:
        v = Decimal(t)
    except InvalidOperation:
        raise UsageError(f"not an integer: {text!r}") from None
    if v != v.to_integral_value():
        raise UsageError(f"not an integer: {text!r}")
    return int(v)


def parse_int_list(text: str) -> list[int]:
    return [parse_int(s) for s in str(text).split(",") if s.strip()]


def parse_phase(text: str) -> es.Phase:
    """linear:THETA | quadratic:THETA | power:H,GAMMA | mixed:K,ALPHA,BETA,H,GAMMA"""
    kind, _, rest = text.partition(":")
    if kind == "linear":
        return es.Phase.linear(RealSpec.parse(rest))
    if kind == "quadratic":
        return es.Phase.quadratic(RealSpec.parse(rest))
    if kind == "power":
        h, g = rest.split(",")
        return es.Phase.power(Fraction(h), Fraction(g))
    if kind == "mixed":
        k, alpha, beta, h, g = rest.split(",")
        return es.Phase.mixed(int(k), BeattyParams(alpha, beta), Fraction(h), Fraction(g))
    raise UsageError(f"unknown phase {text!r}")


def parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    lo, hi = parse_int(lo), parse_int(hi)
    if not 0 <= lo < hi:
        raise UsageError(f"range needs 0 <= N < N2, got {text!r}")
    return lo, hi


# ---------------------------------------------------------------------------
# config and report


@dataclass
class ExperimentConfig:
    """A command plus its flags; the text form is ``key = value`` lines."""

    command: tuple[str, ...]
    params: dict[str, str] = field(default_factory=dict)
    format: str = "json"
    threads: int = 1
    precision: int = 64

    def __post_init__(self):
        if not self.command or self.command[0] not in COMMANDS:
            raise UsageError(f"command must start with one of {COMMANDS}")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")
        allowed = ALLOWED_KEYS[self.command[0]]
        unknown = sorted(set(self.params) - allowed)
        if unknown:
            raise UsageError(f"unknown keys for {self.command[0]}: {', '.join(unknown)}")

    def to_text(self) -> str:
        lines = [f"command = {' '.join(self.command)}", f"format = {self.format}",
                 f"threads = {self.threads}", f"precision = {self.precision}"]
        lines += [f"{k} = {v}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        raw: dict[str, str] = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line {n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            raw[k] = v
        if "command" not in raw:
            raise UsageError("config needs a command line")
        command = tuple(raw.pop("command").split())
        fmt = raw.pop("format", "json")
        threads = parse_int(raw.pop("threads", "1"))
        precision = parse_int(raw.pop("precision", "64"))
        return cls(command, raw, fmt, threads, precision)

    def to_argv(self) -> list[str]:
        argv = list(self.command)
        argv += ["--format", self.format, "--threads", str(self.threads), "--precision", str(self.precision)]
        for k, v in sorted(self.params.items()):
            if k in BOOLEAN_FLAGS:
                if v.lower() in ("1", "true", "yes"):
                    argv.append(f"--{k}")
                continue
            argv += [f"--{k}", v]
        return argv


def strip_timings(obj):
    """Copy of a report with every timing field removed."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


@dataclass
class RunReport:
    config: ExperimentConfig
    results: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def failed(self) -> bool:
        return any(not c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": list(self.config.command),
            "config": self.config.to_text(),
            "results": self.results,
            "checks": self.checks,
            "versions": {"beatty_ps": __version__, "python": platform.python_version(), "numpy": np.__version__},
            "elapsed_ms": self.elapsed_ms,
        }

    def payload(self) -> dict:
        """The part that must not depend on thread count: results and checks, timings removed."""
        d = self.to_dict()
        return strip_timings({k: d[k] for k in ("schema_version", "command", "results", "checks")})


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def render(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str) + "\n"
    rows = [_flatten(r) for r in report.results] or [{"passed": c["passed"], "name": c["name"]} for c in report.checks]
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# command handlers; each returns (results, checks)


def _beatty(a) -> BeattyParams:
    return BeattyParams(a.alpha, a.beta)


def cmd_seq(a):
    results = []
    if a.kind == "beatty":
        B = _beatty(a)
        if a.member:
            results = [{"m": m, "member": beatty_contains(B, m)} for m in parse_int_list(a.member)]
        else:
            results = [{"n": n, "term": beatty_term(B, n)} for n in range(parse_int(a.start), parse_int(a.stop))]
    else:
        P = PSParams(a.c)
        if a.member:
            results = [{"m": m, "member": ps_indicator(P, m)} for m in parse_int_list(a.member)]
        else:
            results = [{"n": n, "term": ps_term(P, n)} for n in range(parse_int(a.start), parse_int(a.stop))]
    return results, []


def cmd_count(a):
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for x in parse_int_list(a.x):
            if a.kind == "ps":
                r = pr.count_ps_primes(PSParams(a.c), x, workers=a.threads)
            elif a.kind == "beatty":
                r = pr.count_beatty_primes(_beatty(a), x, workers=a.threads)
            elif a.kind == "intersection":
                r = pr.count_intersection(_beatty(a), PSParams(a.c), x, workers=a.threads)
            else:
                r = pr.count_ps_in_ap(PSParams(a.c), parse_int(a.d), parse_int(a.a), x, workers=a.threads)
            out.append(r.to_dict())
    return out, []


def _verify_vaughan(n_max: int, U: float, V: float):
    res = vg.identity_residuals(n_max, U, V)
    worst = float(res.max()) if res.size else 0.0
    row = {"check": "vaughan_identity", "max": n_max, "U": U, "V": V, "max_residual": worst, "tolerance": 1e-10}
    return [row], [{"name": "vaughan_identity", "passed": worst <= 1e-10}]


def cmd_verify(a):
    m_max = parse_int(a.max)
    if a.target == "vaughan":
        return _verify_vaughan(m_max, float(Fraction(a.U)), float(Fraction(a.V)))
    if a.target == "beatty":
        B = _beatty(a)
        spec = B.alpha
        if spec.kind != "quadratic" or spec.data[1] < 0 or not B.beta.is_rational:
            raise UsageError("verify beatty needs alpha = (p + q sqrt d)/r with q > 0 and rational beta")
        image = st.beatty_image(*spec.data[:2], spec.data[2], spec.data[3], Fraction(*B.beta.data), m_max)
        bad = sum(beatty_contains(B, m) != (m in image) for m in range(1, m_max + 1))
        return [{"check": "beatty_oracle", "max": m_max, "mismatches": bad, **B.params()}], [{"name": "beatty_oracle", "passed": bad == 0}]
    P = PSParams(a.c)
    from .sequences import ps_indicator_range

    ind = ps_indicator_range(P, 1, m_max + 1)
    brute = np.zeros(m_max, dtype=np.uint8)
    brute[np.fromiter(st.ps_image(P.c, m_max), dtype=np.int64) - 1] = 1
    bad = int(np.count_nonzero(ind != brute))
    return [{"check": "ps_oracle", "max": m_max, "mismatches": bad, **P.params()}], [{"name": "ps_oracle", "passed": bad == 0}]


def cmd_discrepancy(a):
    if a.mode == "cf":
        cf = dio.cf_expand(RealSpec.parse(a.theta), parse_int(a.depth))
        return [{"a0": cf.a0, "partial_quotients": list(cf.partial_quotients),
                 "convergents": [f"{p}/{q}" for p, q in cf.convergents], "terminated": cf.terminated}], []
    if a.mode == "type":
        est = dio.estimate_type(RealSpec.parse(a.theta), parse_int(a.depth))
        return [{"theta": a.theta, "depth": parse_int(a.depth), "tau_hat": est.tau_hat}], []
    if a.mode == "profile":
        rows = dio.discrepancy_profile(RealSpec.parse(a.theta), RealSpec.parse(a.mu), parse_int_list(a.M))
        return [dict(r.__dict__) for r in rows], []
    if a.points:
        pts = [Fraction(s) for s in a.points.split(",")]
    else:
        pts, _ = dio.weyl_points(RealSpec.parse(a.theta), RealSpec.parse(a.mu), parse_int(a.M))
        pts = pts.tolist()
    if a.mode == "exact":
        r = dio.discrepancy_exact(pts)
        lo, hi, lc, rc = r.witness
        return [{"M": r.M, "D": str(r.D), "D_float": float(r.D), "kind": r.kind,
                 "witness": [str(lo), str(hi), lc, rc]}], []
    b = dio.discrepancy_bounds([float(p) for p in pts])
    return [{"M": b.M, "lower": b.lower, "upper": b.upper, "star": b.star}], []


def cmd_harmonic(a):
    if a.mode == "sawtooth":
        spec = RealSpec.parse(a.t)
        v = hm.sawtooth(spec)
        return [{"t": a.t, "psi": str(v), "psi_float": float(v)}], []
    if a.mode == "vaaler":
        r = hm.majorant_check(hm.vaaler_approx(parse_int(a.H)), parse_int(a.grid))
        return [r.to_dict()], [{"name": "vaaler_majorant", "passed": r.max_violation <= 1e-12}]
    T = hm.vinogradov_indicator(a.a, a.delta, parse_int(a.K))
    if a.coefficients:
        return [{"k": k, "re": re, "im": im, "bound": b} for k, re, im, b in T.rows()], []
    row = st._vinogradov_row(a.a, a.delta, parse_int(a.K), parse_int(a.grid))
    return [row], [{"name": "vinogradov_properties", "passed": row["ok"]}]


def cmd_vaughan(a):
    if a.mode == "verify":
        return _verify_vaughan(parse_int(a.max), float(Fraction(a.U)), float(Fraction(a.V)))
    if a.mode == "terms":
        T = vg.vaughan_terms(parse_int(a.n), float(Fraction(a.U)), float(Fraction(a.V)))
        return [{"n": T.n, "T1": T.T1, "T2": T.T2, "T3": T.T3, "total": T.total,
                 "exact": [{str(p): c for p, c in e.items()} for e in T.exact]}], []
    N, N2 = parse_range(a.range)
    params = vg.VaughanParams(float(Fraction(a.U)), float(Fraction(a.V))) if a.U and a.V else None
    ev, res = vg.bilinear_split(N, N2, params, parse_int(a.k), parse_int(a.h), _beatty(a), PSParams(a.c))
    split = ev[3].exact[0] + ev[4].exact[0] == ev[0].exact[0] and ev[3].exact[1] + ev[4].exact[1] == ev[0].exact[1]
    rows = [e.to_dict() for e in ev]
    checks = [{"name": "reconstruction", "passed": res <= 1e-6 * N, "residual": res},
              {"name": "S4+S5=S1", "passed": split}]
    return rows, checks


def cmd_expsum(a):
    chk = a.check
    if chk is None:
        N, N2 = parse_range(a.range)
        v = es.exp_sum(es.ExpSumSpec(parse_phase(a.phase), N, N2, a.weight), workers=a.threads)
        return [{"N": N, "N2": N2, "weight": a.weight, "phase": a.phase, "re": v.real, "im": v.imag, "abs": abs(v)}], []
    if chk == "lambda":
        rows = []
        for M in parse_int_list(a.M):
            v, e = es.lambda_twisted(parse_int(a.q), parse_int(a.a), RealSpec.parse(a.theta), parse_int(a.k), M)
            rows.append({"param": M, "re": v.real, "im": v.imag, "exponent": e})
        return rows, []
    ratios = []
    for N in parse_int_list(a.N):
        if chk == "vdc":
            r = es.vdc_ratio(parse_phase(a.phase), N, workers=a.threads)
        elif chk == "prime-reduce":
            r = es.prime_reduction_check(None if a.phase in (None, "one") else parse_phase(a.phase), N)
        else:
            K = parse_int(a.K) if a.K else None
            kw = dict(m=parse_int(a.m), gamma=Fraction(a.gamma), h=parse_int(a.h), d=parse_int(a.d), a_k=a.ak)
            if chk == "type1":
                r = es.type1_ratio(K or vg.iroot(N**3, 7)[0], N, **kw)
            else:
                r = es.type2_ratio(K or int(N**0.45), N, b_l=a.bl, **kw)
        ratios.append(r)
    rows = [{"param": r.params.get("N"), "measured": r.measured, "bound": r.bound, "ratio": r.ratio, "check": r.check,
             "params": r.params} for r in ratios]
    return rows, [{"name": f"{chk}_ratio<=10", "passed": all(r.ratio <= 10 for r in ratios)}]


def cmd_suite(a):
    only = set(parse_int_list(a.only)) if a.only else None
    checks = st.run_suite(a.threads, only, log=lambda s: print(s, file=sys.stderr))
    results = [{**c.payload(), "elapsed_s": c.elapsed_s} for c in checks]
    return results, [{"name": f"criterion {c.criterion}: {c.name}", "passed": c.passed} for c in checks]


HANDLERS = {
    "seq": cmd_seq,
    "count": cmd_count,
    "verify": cmd_verify,
    "discrepancy": cmd_discrepancy,
    "harmonic": cmd_harmonic,
    "vaughan": cmd_vaughan,
    "expsum": cmd_expsum,
    "suite": cmd_suite,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=None, help=f"worker processes (default ${THREADS_ENV} or 1)")
    common.add_argument("--precision", type=int, default=64, help="initial bits for certified floors")
    common.add_argument("--config", default=None, help="file of key = value lines")

    p = _Parser(prog="beatty-ps", description="Beatty / Piatetski-Shapiro prime toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("seq", parents=[common], help="sequence terms and membership")
    s.add_argument("kind", choices=("beatty", "ps"))
    s.add_argument("--alpha", default="sqrt2")
    s.add_argument("--beta", default="0")
    s.add_argument("--c", default="3/2")
    s.add_argument("--start", default="1")
    s.add_argument("--stop", default="11")
    s.add_argument("--member", default=None, help="comma-separated m values to test")

    s = sub.add_parser("count", parents=[common], help="prime counts against main terms")
    s.add_argument("kind", choices=("ps", "beatty", "intersection", "ap"))
    s.add_argument("--alpha", default="sqrt2")
    s.add_argument("--beta", default="0")
    s.add_argument("--c", default="3/2")
    s.add_argument("--x", required=True, help="threshold or comma-separated sweep")
    s.add_argument("--d", default="1")
    s.add_argument("--a", default="1")

    s = sub.add_parser("verify", parents=[common], help="oracle and identity checks")
    s.add_argument("target", choices=("vaughan", "beatty", "ps"))
    s.add_argument("--max", default="100000")
    s.add_argument("--U", default="2")
    s.add_argument("--V", default="2")
    s.add_argument("--alpha", default="sqrt2")
    s.add_argument("--beta", default="0")
    s.add_argument("--c", default="3/2")

    s = sub.add_parser("discrepancy", parents=[common], help="continued fractions, type, discrepancy")
    s.add_argument("mode", choices=("exact", "bounds", "profile", "type", "cf"))
    s.add_argument("--theta", default="golden")
    s.add_argument("--mu", default="0")
    s.add_argument("--M", default="1000")
    s.add_argument("--points", default=None, help="comma-separated rationals in [0, 1)")
    s.add_argument("--depth", default="30")

    s = sub.add_parser("harmonic", parents=[common], help="Vaaler and smoothed-indicator checks")
    s.add_argument("mode", choices=("vaaler", "vinogradov", "sawtooth"))
    s.add_argument("--H", default="10")
    s.add_argument("--grid", default="10000")
    s.add_argument("--a", default="1/3")
    s.add_argument("--delta", default="1/50")
    s.add_argument("--K", default="200")
    s.add_argument("--t", default="1/4")
    s.add_argument("--coefficients", action="store_true", help="dump k,re,im,bound rows")

    s = sub.add_parser("vaughan", parents=[common], help="Vaughan identity and bilinear sums")
    s.add_argument("mode", choices=("verify", "terms", "split"))
    s.add_argument("--max", default="100000")
    s.add_argument("--U", default=None)
    s.add_argument("--V", default=None)
    s.add_argument("--n", default="6")
    s.add_argument("--range", default="1000:2000")
    s.add_argument("--k", default="1")
    s.add_argument("--h", default="1")
    s.add_argument("--alpha", default="sqrt2")
    s.add_argument("--beta", default="0")
    s.add_argument("--c", default="3/2")

    s = sub.add_parser("expsum", parents=[common], help="exponential sums and bound ratios")
    s.add_argument("--phase", default=None)
    s.add_argument("--range", default="0:1000")
    s.add_argument("--weight", choices=es.WEIGHTS, default="1")
    s.add_argument("--check", choices=("vdc", "type1", "type2", "lambda", "prime-reduce"), default=None)
    s.add_argument("--N", default="1000,10000,100000")
    s.add_argument("--K", default=None)
    s.add_argument("--m", default="1")
    s.add_argument("--gamma", default="12/13")
    s.add_argument("--h", default="1")
    s.add_argument("--d", default="1")
    s.add_argument("--ak", choices=es.COEFFICIENTS, default="one")
    s.add_argument("--bl", choices=es.COEFFICIENTS, default="one")
    s.add_argument("--q", default="1")
    s.add_argument("--a", default="0")
    s.add_argument("--theta", default="sqrt2")
    s.add_argument("--k", default="1")
    s.add_argument("--M", default="10000,100000")

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return p


def _allowed_keys() -> dict[str, frozenset[str]]:
    p = build_parser()
    sub = next(a for a in p._actions if isinstance(a, argparse._SubParsersAction))
    out = {}
    for name, sp in sub.choices.items():
        keys = {a.dest for a in sp._actions if a.option_strings}
        out[name] = frozenset(keys - {"help", "format", "threads", "precision", "config"})
    return out


ALLOWED_KEYS = _allowed_keys()


def _config_from_namespace(a, argv_command: list[str]) -> ExperimentConfig:
    params = {}
    for k in ALLOWED_KEYS[a.command]:
        v = getattr(a, k)
        if v is not None and v is not False:
            params[k] = "true" if v is True else str(v)
    return ExperimentConfig(tuple(argv_command), params, a.format, a.threads, a.precision)


def _positional(a) -> list[str]:
    for key in ("kind", "target", "mode"):
        if hasattr(a, key):
            return [a.command, getattr(a, key)]
    return [a.command]


def _expand_config(argv: list[str]) -> list[str]:
    """Replace ``--config PATH`` by the flags stored in the file (command-line flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    try:
        with open(path) as fh:
            cfg = ExperimentConfig.from_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    base = cfg.to_argv()
    ncmd = len(cfg.command)
    if rest and rest[0] in COMMANDS and rest[: len(cfg.command)] != list(cfg.command):
        raise UsageError("command on the command line differs from the config file")
    extra = rest[ncmd:] if rest[:ncmd] == list(cfg.command) else rest
    return base + extra


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    """Run one command; the report goes to ``stdout``. Returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        argv = _expand_config(argv)
        a = build_parser().parse_args(argv)
        if a.threads is None:
            a.threads = parse_int(os.environ.get(THREADS_ENV, "1"))
        cfg = _config_from_namespace(a, _positional(a))
        with precision_budget(a.precision):
            results, checks = HANDLERS[a.command](a)
        report = RunReport(cfg, results, checks, (time.perf_counter() - t0) * 1000)
        stdout.write(render(report, a.format))
        return 1 if report.failed else 0
    except PrecisionExhausted as exc:
        print(f"error: precision exhausted: {exc}", file=stderr)
        return 3
    except (UsageError, BeattyPSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
