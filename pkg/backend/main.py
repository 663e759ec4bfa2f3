"""Command-line front end: python -m backend.main <subcommand> [flags]."""
import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import pandas as pd
from pydantic import BaseModel, ValidationError

from backend.errors import (
    AlphabetMismatchError,
    ConfigError,
    DiscError,
    InsufficientTermsError,
    PadicPeriodError,
    SolverError,
    UnsupportedBasepointError,
    WeightOverflowError,
    WordSyntaxError,
)
from backend.frobenius_path import (
    Basepoint,
    PathContext,
    coleman_iterint,
    compute_associator,
    pmzv,
)
from backend.kz_polylog import build_li_table, degree_for, eval_li, nested_sum_oracle
from backend.models import (
    Manifest,
    PadicValue,
    RunConfig,
    ShuffleResult,
    SolverStatsOut,
    Suite,
    ValueResult,
)
from backend.padic_core import PadicNumber, iwasawa_log, parse_rational
from backend.shuffle_words import Word, index_to_word, parse_word, shuffle, word_to_index
from backend.verify import run_suites
from config import (
    DEFAULT_PRECISION,
    DEFAULT_PRIME,
    DEFAULT_WEIGHT,
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_SOLVER,
    LOG_FORMAT,
    VERIFY_SUITES,
)

logger = logging.getLogger(__name__)

CONFIG_ERRORS = (
    ConfigError,
    ValidationError,
    WordSyntaxError,
    DiscError,
    UnsupportedBasepointError,
    WeightOverflowError,
    AlphabetMismatchError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padic-periods",
        description="p-adic multiple zeta values, polylogarithms and iterated integrals.",
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--p", type=int, default=DEFAULT_PRIME, help="odd prime")
    shared.add_argument("--N", type=int, default=DEFAULT_PRECISION, help="p-adic digits")
    shared.add_argument("--W", type=int, default=DEFAULT_WEIGHT, help="weight cap")
    shared.add_argument("--D", default="auto", help="t-degree cap or 'auto'")
    shared.add_argument("--threads", type=int, default=1, help="workers for table building")
    shared.add_argument("--json-out", dest="json_out", default=None, help="also write JSON here")
    shared.add_argument("--pretty", action="store_true", help="print a table instead of JSON")
    shared.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    words = argparse.ArgumentParser(add_help=False)
    words.add_argument("--word", default=None, help="letter string, e.g. 011")
    words.add_argument("--index", default=None, help="comma-separated multi-index, e.g. 2,1")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("pmzv", parents=[shared, words], help="p-adic multiple zeta value")
    polylog = sub.add_parser("polylog", parents=[shared, words], help="multiple polylog in the disc of 0")
    polylog.add_argument("--z", required=True, help="point a/b with v_p(z) >= 1")
    iterint = sub.add_parser("iterint", parents=[shared, words], help="iterated integral between basepoints")
    iterint.add_argument("--lower", default="0", help="'0' (1 at 0), '1' (-1 at 1) or a/b")
    iterint.add_argument("--upper", default="1", help="'0' (1 at 0), '1' (-1 at 1) or a/b")
    shuf = sub.add_parser("shuffle", parents=[shared], help="shuffle product of two words")
    shuf.add_argument("--u", required=True)
    shuf.add_argument("--v", required=True)
    verify = sub.add_parser("verify", parents=[shared], help="run verification suites")
    verify.add_argument("--suite", action="append", choices=VERIFY_SUITES, default=None)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    index = None
    if getattr(args, "index", None):
        try:
            index = [int(k) for k in args.index.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad multi-index {args.index!r}") from exc
    return RunConfig(
        p=args.p,
        N=args.N,
        W=args.W,
        D=args.D,
        threads=args.threads,
        word=getattr(args, "word", None),
        index=index,
        z=getattr(args, "z", None),
        lower=getattr(args, "lower", None),
        upper=getattr(args, "upper", None),
        suites=[Suite(s) for s in (getattr(args, "suite", None) or VERIFY_SUITES)],
        json_out=args.json_out,
        pretty=args.pretty,
    )


def _word(cfg: RunConfig) -> Word:
    if cfg.index is not None:
        return index_to_word(cfg.index, regularized=True)
    if cfg.word is None:
        raise ConfigError("give --word or --index")
    return parse_word(cfg.word)


def _manifest(cfg: RunConfig, assoc=None) -> Manifest:
    stats = [SolverStatsOut(**s.model_dump()) for s in assoc.stats] if assoc else []
    return Manifest(
        p=cfg.p,
        N=cfg.N,
        W=cfg.W,
        D=assoc.degree_cap if assoc else cfg.degree,
        threads=cfg.threads,
        solver=stats,
    )


def write_atomic(path: str, text: str) -> None:
    tmp_path = path + ".tmp"
    with open(tmp_path, "w", encoding="utf-8") as f:
        f.write(text)
    os.replace(tmp_path, path)


def emit(model: BaseModel, cfg: RunConfig) -> None:
    payload = model.model_dump(mode="json")
    text = json.dumps(payload, sort_keys=True)
    if cfg.json_out:
        write_atomic(cfg.json_out, text + "\n")
    if cfg.pretty:
        print(_table(payload).to_string(index=False))
    else:
        print(text)


def _table(payload: dict) -> pd.DataFrame:
    if "checks" in payload:
        df = pd.DataFrame(payload["checks"])
        return df[["suite", "name", "passed", "residual", "tolerance"]]
    if "value" in payload:
        row = {k: payload[k] for k in ("p", "N", "word", "route")}
        row["value"] = payload["value"]["text"]
        if payload.get("check"):
            row["check"] = payload["check"]
        return pd.DataFrame([row])
    return pd.DataFrame(payload.get("terms", []))


# ── Subcommands ──────────────────────────────────────────────

def cmd_pmzv(cfg: RunConfig) -> int:
    w = _word(cfg)
    if len(w) > cfg.W:
        raise WeightOverflowError(f"word weight {len(w)} above --W {cfg.W}")
    assoc = compute_associator(cfg.p, cfg.N, cfg.W, cfg.degree)
    value = pmzv(w, assoc)
    emit(ValueResult(p=cfg.p, N=cfg.N, word=w.letters, route="af",
                     value=PadicValue.of(value), manifest=_manifest(cfg, assoc)), cfg)
    return EXIT_OK


def cmd_polylog(cfg: RunConfig) -> int:
    w = _word(cfg)
    z = PadicNumber.from_rational(parse_rational(cfg.z), cfg.p, cfg.N)
    if z.is_zero or z.valuation < 1:
        raise DiscError(f"z = {cfg.z} is not in the disc of 0 for p = {cfg.p}")
    table = build_li_table(len(w), cfg.degree or 1, threads=cfg.threads)
    value, table = eval_li(table, w, z, cfg.N)

    check = None
    if w.letters.endswith("1") and set(w.letters) <= {"0", "1"}:
        terms = degree_for(cfg.N, z.valuation, len(w), cfg.p, 1)
        expected = nested_sum_oracle(word_to_index(w), z, terms, cfg.N)
        ok = value.agrees_with(expected)
        if w.letters == "1":
            ok = ok and value.agrees_with(-iwasawa_log(1 - z))
        check = "consistent" if ok else "inconsistent"
    manifest = Manifest(p=cfg.p, N=cfg.N, W=len(w), D=table.degree_cap, threads=cfg.threads)
    emit(ValueResult(p=cfg.p, N=cfg.N, word=w.letters, route="disc0",
                     value=PadicValue.of(value), check=check, manifest=manifest), cfg)
    return EXIT_OK if check != "inconsistent" else EXIT_FAILURE


def cmd_iterint(cfg: RunConfig) -> int:
    w = _word(cfg)
    lower = Basepoint.parse(cfg.lower, cfg.p, cfg.N)
    upper = Basepoint.parse(cfg.upper, cfg.p, cfg.N)
    if len(w) > cfg.W:
        raise WeightOverflowError(f"word weight {len(w)} above --W {cfg.W}")
    assoc = compute_associator(cfg.p, cfg.N, cfg.W, cfg.degree)
    ctx = PathContext(associator=assoc, threads=cfg.threads)
    value, route = coleman_iterint(lower, upper, w, ctx)
    emit(ValueResult(p=cfg.p, N=cfg.N, word=w.letters, route=route,
                     value=PadicValue.of(value), manifest=_manifest(cfg, assoc)), cfg)
    return EXIT_OK


def cmd_shuffle(cfg: RunConfig, u: str, v: str) -> int:
    product = shuffle(parse_word(u), parse_word(v))
    emit(ShuffleResult(u=u, v=v, terms=product.to_json()["terms"]), cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    report = run_suites(cfg)
    emit(report, cfg)
    return EXIT_OK if report.passed else EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        cfg = _config(args)
        if args.command == "pmzv":
            return cmd_pmzv(cfg)
        if args.command == "polylog":
            return cmd_polylog(cfg)
        if args.command == "iterint":
            return cmd_iterint(cfg)
        if args.command == "shuffle":
            return cmd_shuffle(cfg, args.u, args.v)
        return cmd_verify(cfg)
    except (SolverError, InsufficientTermsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ValidationError as e:
        print(f"error: {_first_message(e)}", file=sys.stderr)
        return EXIT_CONFIG
    except CONFIG_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (PadicPeriodError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def _first_message(exc: ValidationError) -> str:
    err = exc.errors()[0]
    return str(err.get("ctx", {}).get("error", err["msg"]))


if __name__ == "__main__":
    sys.exit(main())
