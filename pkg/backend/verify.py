"""
Verification suites run by `main verify`.

Each suite returns CheckResult rows; a suite never raises on a failed
property, only on broken input.
"""
from __future__ import annotations

import logging
from typing import Callable, Dict, List, Optional, Sequence

from backend.frobenius_path import (
    Associator,
    Basepoint,
    FormalPeriod,
    PathContext,
    coleman_iterint,
    compute_associator,
    per_af,
    per_cl,
    pmzv,
)
from backend.kz_polylog import (
    build_li_table,
    check_differential,
    degree_for,
    eval_li,
    nested_sum_oracle,
)
from backend.models import CheckResult, RunConfig, Suite, VerifyReport
from backend.nc_series import is_grouplike, nc_inverse, nc_mul, pair, residual_size
from backend.padic_core import PadicNumber, iwasawa_log
from backend.shuffle_words import (
    DEFAULT,
    EMPTY,
    ShuffleElement,
    Word,
    antipode,
    deconcat,
    shuffle,
    word_to_index,
)

logger = logging.getLogger(__name__)

SHUFFLE_WEIGHT = 5
ORACLE_WEIGHT = 4
TABLE_WEIGHT = 4
TABLE_DEGREE = 12


def _check(suite: Suite, name: str, passed: bool, residual: object = 0, detail: str = "") -> CheckResult:
    return CheckResult(suite=suite, name=name, passed=passed, residual=str(residual), detail=detail)


def _padic_check(suite: Suite, name: str, got: PadicNumber, expected: PadicNumber) -> CheckResult:
    diff = got - expected
    return _check(suite, name, diff.is_zero, residual_size(diff), detail=got.render())


# ── Suites ───────────────────────────────────────────────────

def check_shuffle(cfg: RunConfig, ctx: Optional[PathContext]) -> List[CheckResult]:
    """Commutativity, associativity and the antipode identity, exactly."""
    W = min(cfg.W, SHUFFLE_WEIGHT)
    words = DEFAULT.words_up_to(W)
    bad_comm, bad_assoc, bad_antipode = [], [], []
    for u in words:
        for v in words:
            if len(u) + len(v) > W:
                continue
            if shuffle(u, v) != shuffle(v, u):
                bad_comm.append((u.letters, v.letters))
            for x in words:
                if len(u) + len(v) + len(x) > W:
                    continue
                left = ShuffleElement.of(u) * shuffle(v, x)
                right = shuffle(u, v) * ShuffleElement.of(x)
                if left != right:
                    bad_assoc.append((u.letters, v.letters, x.letters))
    for w in words[1:]:
        total = ShuffleElement()
        for prefix, suffix in deconcat(w):
            total = total + antipode(prefix) * ShuffleElement.of(suffix)
        if total.terms:
            bad_antipode.append(w.letters)
    return [
        _check(Suite.shuffle, "commutativity", not bad_comm, len(bad_comm), str(bad_comm[:3])),
        _check(Suite.shuffle, "associativity", not bad_assoc, len(bad_assoc), str(bad_assoc[:3])),
        _check(Suite.shuffle, "antipode", not bad_antipode, len(bad_antipode), str(bad_antipode[:3])),
    ]


def check_grouplike(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    report = is_grouplike(ctx.associator.series)
    table = build_li_table(min(cfg.W, TABLE_WEIGHT), TABLE_DEGREE)
    table_report = is_grouplike(table.series())
    failures = check_differential(table)
    return [
        _check(Suite.grouplike, "associator", report.is_zero, report.max_residual, str(report.worst_pair)),
        _check(Suite.grouplike, "polylog table", table_report.is_zero, table_report.max_residual),
        _check(Suite.grouplike, "differential equation", not failures, len(failures), str(failures[:3])),
    ]


def check_anchors(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    assoc = ctx.associator
    rows = []
    for w in DEFAULT.words(1):
        rows.append(_check(Suite.anchors, f"weight one {w.letters}", assoc.coeff(w).is_zero,
                           residual_size(assoc.coeff(w))))
    if assoc.weight_cap >= 2:
        z2 = pmzv((2,), assoc)
        rows.append(_check(Suite.anchors, "zeta_p(2)", z2.is_zero, residual_size(z2)))
    return rows


def check_theorem(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    """per_af and per_cl agree bit for bit on every word."""
    assoc = ctx.associator
    mismatched = []
    for w in DEFAULT.words_up_to(assoc.weight_cap):
        af = per_af(FormalPeriod.mzv(w), ctx)
        cl = per_cl(w, assoc)
        if af != cl:
            mismatched.append(w.letters)
    return [_check(Suite.theorem, "per_af == per_cl", not mismatched, len(mismatched), str(mismatched[:3]))]


def check_torsor(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    series = ctx.associator.series
    inverse = nc_inverse(series)
    product = nc_mul(series, inverse)
    worst = residual_size(product.constant - 1)
    for w, c in product.coeffs.items():
        if w != EMPTY:
            worst = max(worst, residual_size(c))
    bad = []
    for w in DEFAULT.words_up_to(series.weight_cap):
        if not pair(w, inverse).agrees_with(pair(antipode(w), series)):
            bad.append(w.letters)
    return [
        _check(Suite.torsor, "assoc * assoc^-1 == 1", worst == 0, worst),
        _check(Suite.torsor, "inverse is antipode", not bad, len(bad), str(bad[:3])),
    ]


def _oracle_points(p: int, N: int) -> Dict[str, PadicNumber]:
    return {
        str(p): PadicNumber.from_rational(p, p, N),
        str(p * p): PadicNumber.from_rational(p * p, p, N),
        str(p + p * p): PadicNumber.from_rational(p + p * p, p, N),
    }


def check_oracle(cfg: RunConfig, ctx: Optional[PathContext]) -> List[CheckResult]:
    p, N = cfg.p, cfg.N
    W = min(cfg.W, ORACLE_WEIGHT)
    table = build_li_table(W, 8)
    rows = []
    for label, z in _oracle_points(p, N).items():
        for w in DEFAULT.words_up_to(W):
            if not w.letters.endswith("1"):
                continue
            got, table = eval_li(table, w, z, N)
            terms = degree_for(N, z.valuation, len(w), p, 1)
            expected = nested_sum_oracle(word_to_index(w), z, terms, N)
            rows.append(_padic_check(Suite.oracle, f"{w.letters} at z={label}", got, expected))
    return rows


def check_branch(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    """e0 into the disc of 1 gives log z; e1 inside the disc of 0 gives -log(1 - z)."""
    p, N = cfg.p, ctx.precision
    rows = []
    lower = Basepoint.tangent_at_zero()
    for q in (1 + p, 1 - p, 1 + p * p):
        z = PadicNumber.from_rational(q, p, N)
        got, route = coleman_iterint(lower, Basepoint.at(z), Word(letters="0"), ctx)
        rows.append(_padic_check(Suite.branch, f"e0 to {q} via {route}", got, iwasawa_log(z)))
    for q in (p, 2 * p, p * p):
        z = PadicNumber.from_rational(q, p, N)
        got, route = coleman_iterint(lower, Basepoint.at(z), Word(letters="1"), ctx)
        rows.append(_padic_check(Suite.branch, f"e1 to {q} via {route}", got, -iwasawa_log(1 - z)))
    return rows


def check_precision(cfg: RunConfig, ctx: PathContext) -> List[CheckResult]:
    assoc = ctx.associator
    finer = compute_associator(assoc.prime, assoc.precision + 4, assoc.weight_cap)
    changed = [
        w.letters
        for w, c in assoc.series.coeffs.items()
        if finer.coeff(w).truncate(c.absolute_precision) != c
    ]
    rows = [_check(Suite.precision, "N + 4 truncates to N", not changed, len(changed), str(changed[:3]))]

    p, N = cfg.p, cfg.N
    z = PadicNumber.from_rational(p, p, N)
    w = Word(letters="0" * (min(cfg.W, 3) - 1) + "1") if cfg.W >= 1 else Word(letters="1")
    base, table = eval_li(build_li_table(len(w), 1), w, z, N)
    doubled, _ = eval_li(build_li_table(len(w), 2 * table.degree_cap), w, z, N)
    rows.append(_check(Suite.precision, f"doubled degree for {w.letters}", base == doubled,
                       residual_size(base - doubled)))
    return rows


SUITES: Dict[Suite, Callable[[RunConfig, Optional[PathContext]], List[CheckResult]]] = {
    Suite.shuffle: check_shuffle,
    Suite.grouplike: check_grouplike,
    Suite.anchors: check_anchors,
    Suite.theorem: check_theorem,
    Suite.torsor: check_torsor,
    Suite.oracle: check_oracle,
    Suite.branch: check_branch,
    Suite.precision: check_precision,
}

# suites that need no associator
STANDALONE = {Suite.shuffle, Suite.oracle}


def run_suites(cfg: RunConfig, suites: Optional[Sequence[Suite]] = None,
               assoc: Optional[Associator] = None) -> VerifyReport:
    suites = list(suites or cfg.suites)
    ctx = None
    if any(s not in STANDALONE for s in suites):
        if assoc is None:
            assoc = compute_associator(cfg.p, cfg.N, cfg.W, cfg.degree)
        ctx = PathContext(associator=assoc, threads=cfg.threads)
    checks: List[CheckResult] = []
    for suite in suites:
        rows = SUITES[suite](cfg, ctx)
        logger.info("suite %s: %d/%d passed", suite.value, sum(r.passed for r in rows), len(rows))
        checks.extend(rows)
    counts: Dict[str, int] = {}
    for row in checks:
        counts[row.suite.value] = counts.get(row.suite.value, 0) + (0 if row.passed else 1)
    return VerifyReport(
        p=cfg.p,
        N=cfg.N,
        W=cfg.W,
        passed=all(r.passed for r in checks),
        checks=checks,
        counts=counts,
    )
