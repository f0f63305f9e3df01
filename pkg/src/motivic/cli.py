"""Command-line front end: `motivic volume|check|hecke`.

Exit codes: 0 pass, 1 check failure, 2 input error.
"""

from __future__ import annotations

import json
import sys

import click

from .suites import SUITES, JobConfig, run_suite

EXIT_FAIL = 1
EXIT_INPUT = 2


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _parse_m_range(text: str) -> tuple:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise InputError(f"--m-range expects a..b, got {text!r}")
    if not 1 <= lo <= hi:
        raise InputError("--m-range needs 1 <= a <= b")
    return lo, hi


def _load_config(path, m_range, mode, divisible, default_m) -> JobConfig:
    doc = {}
    if path:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}")
    if m_range:
        doc["m_range"] = _parse_m_range(m_range)
    elif "m_range" not in doc:
        doc["m_range"] = default_m
    if mode:
        doc["mode"] = mode
    if divisible is not None:
        doc["divisible"] = divisible
    try:
        return JobConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad config: {exc}")


def _common(f):
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON job configuration.")(f)
    f = click.option("--m-range", help="Counting levels a..b.")(f)
    f = click.option("--mode", type=click.Choice(["exact", "graded"]), help="Full class or top filtration part.")(f)
    f = click.option("--divisible/--no-divisible", default=None, help="Treat the value group as divisible.")(f)
    return f


@click.group()
def main():
    """Exact motivic volumes, convolution identities and Hecke computations."""


@main.command()
@click.argument("polytope_file", type=click.Path(dir_okay=False))
@_common
def volume(polytope_file, config_path, m_range, mode, divisible):
    """Class of a polytope, its filtration degree and a count table."""
    from .gring import count_hom, format_elem
    from .polytope import count_lattice, load_polytope
    from .volume import class_of

    cfg = _load_config(config_path, m_range, mode, divisible, (1, 4))
    try:
        X = load_polytope(polytope_file)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot parse polytope: {exc}")
    try:
        cls = class_of(X)
    except ValueError as exc:
        if "unbounded" in str(exc):
            raise InputError("unbounded input")
        raise InputError(str(exc))
    spec = cfg.spec
    if spec is None and X.rank != 1:
        raise InputError("rank > 1 needs spec in the config")
    shown = cls.top_part() if cfg.mode == "graded" else cls
    click.echo(f"class: {format_elem(shown)}")
    click.echo(f"filtration degree: {cls.degree() if not cls.is_zero() else '-inf'}")
    click.echo("m\tcount_m\tlattice")
    failed = False
    for m in cfg.ms:
        a, b = count_hom(cls, m, spec), count_lattice(X, m, spec)
        failed |= a != b
        click.echo(f"{m}\t{a}\t{b}{'' if a == b else '  MISMATCH'}")
    sys.exit(EXIT_FAIL if failed else 0)


@main.command()
@click.argument("suite")
@_common
def check(suite, config_path, m_range, mode, divisible):
    """Run a named check suite (or `all`)."""
    if suite != "all" and suite not in SUITES:
        raise InputError(f"unknown suite {suite!r}; choose from all, {', '.join(sorted(SUITES))}")
    cfg = _load_config(config_path, m_range, mode, divisible, (1, 8))
    results = run_suite(suite, cfg)
    for r in results:
        click.echo(r.line())
    n_ok = sum(r.ok for r in results)
    click.echo(f"{n_ok}/{len(results)} passed")
    sys.exit(0 if n_ok == len(results) else EXIT_FAIL)


@main.command()
@click.argument("expr", required=False)
@click.option("--oracle", nargs=3, type=int, metavar="Q0 N GAMMA", help="Count structure constants over a truncation.")
def hecke(expr, oracle):
    """Normal form of a Hecke expression, or the counted constants table."""
    from .hecke import TruncationError, finite_oracle, parse_hecke, symbolic_constants

    if oracle:
        q0, N, gamma = oracle
        try:
            got = finite_oracle(q0, N, gamma)
        except (ValueError, TruncationError) as exc:
            raise InputError(str(exc))
        want = symbolic_constants(gamma)
        failed = False
        click.echo("constant\tcounted\ttable")
        for key in sorted(got):
            w = want[key].at(q=q0)
            failed |= got[key] != w
            click.echo(f"{key}\t{got[key]}\t{w}")
        sys.exit(EXIT_FAIL if failed else 0)
    if expr is None:
        raise InputError("give an expression or --oracle Q0 N GAMMA")
    try:
        X = parse_hecke(expr)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse expression: {exc}")
    click.echo(str(X))


if __name__ == "__main__":
    main()
