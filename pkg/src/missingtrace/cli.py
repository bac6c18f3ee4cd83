"""Command line entry point.

Exit codes: 0 success, 2 a verification failed, 3 bad input.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from . import catalog as cat
from . import ecurve as ec
from . import figures
from . import grouplat as gl
from . import ltconst as lt
from . import modcurve as mc
from . import mtclassify as mt
from . import verify
from .qpoly import ExprSyntaxError

EXIT_FAIL = 2
EXIT_INPUT = 3


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


@dataclass
class Settings:
    out: Path | None
    as_json: bool
    cap: int
    threads: int


def _dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit(s: Settings, payload: dict, summary: str, plots=()) -> None:
    """Write the JSON report (and figures beside it) and/or print to stdout."""
    if s.out is not None:
        s.out.parent.mkdir(parents=True, exist_ok=True)
        s.out.write_text(_dump(payload), encoding="utf-8")
        for suffix, draw in plots:
            draw(s.out.with_name(f"{s.out.stem}.{suffix}.png"))
    if s.as_json or s.out is None:
        click.echo(_dump(payload), nl=False)
    else:
        click.echo(summary)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def load_group(ref: str, cap: int) -> gl.SubgroupSpec:
    """A catalog label such as 3,1,1, or a JSON file holding one subgroup record."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        try:
            rec = json.loads(path.read_text("utf-8"))
            return gl.SubgroupSpec.from_record(rec, cap=cap)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{ref}: {exc}") from None
    try:
        return cat.find_group(ref).spec(cap)
    except cat.CatalogError as exc:
        raise InputError(str(exc)) from None


def _global_options(f):
    f = click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
                     help="write the JSON report here; figures go beside it")(f)
    f = click.option("--json", "as_json", is_flag=True, default=None,
                     help="print JSON to stdout even with --out")(f)
    f = click.option("--cap", type=click.IntRange(min=1),
                     help=f"maximum subgroup size during closure [default: {gl.DEFAULT_CAP}]")(f)
    f = click.option("--threads", type=click.IntRange(min=1), help="worker threads [default: 1]")(f)
    return f


def command(*args, **kw):
    """A subcommand that also accepts the global flags after its name."""
    def wrap(fn):
        @main.command(*args, **kw)
        @_global_options
        @click.pass_context
        @functools.wraps(fn)
        def inner(ctx, out, as_json, cap, threads, **params):
            base: Settings = ctx.obj
            s = Settings(out or base.out, bool(as_json or base.as_json),
                         cap or base.cap, threads or base.threads)
            return fn(s, **params)
        return inner
    return wrap


@click.group()
@_global_options
@click.pass_context
def main(ctx, out, as_json, cap, threads):
    """Missing Frobenius trace groups, their modular curves and elliptic curve families."""
    ctx.obj = Settings(out, bool(as_json), cap or gl.DEFAULT_CAP, threads or 1)


@command()
@click.option("--genus", "genus_target", type=int, default=0, show_default=True)
@click.option("--level", type=int, required=True)
@click.option("--deep-levels", is_flag=True, help="allow SL2-levels 48 and 96")
def classify(s: Settings, genus_target, level, deep_levels):
    """Maximal new missing trace groups of a given genus and level."""
    try:
        found = mt.classify(genus_target, level, deep=deep_levels)
    except mt.UnsupportedLevel as exc:
        raise InputError(str(exc)) from None
    groups = [g.to_dict() for g in found]
    for g, c in zip(groups, found):
        g["catalog_label"] = verify.match_catalog(c.group)
    payload = {"genus": genus_target, "level": level, "count": len(groups), "groups": groups}
    emit(s, payload, f"level {level}, genus {genus_target}: {len(groups)} groups")


@command("verify-catalog")
@click.argument("path", required=False, type=click.Path(exists=True, dir_okay=False))
def verify_catalog(s: Settings, path):
    """Run the per-entry and pairwise checks over a group catalog."""
    try:
        records = cat.load_groups(path)
        for r in records:
            r.spec(s.cap)
        report = verify.verify_catalog(records=records).to_dict()
    except cat.CatalogError as exc:
        raise InputError(str(exc)) from None
    lines = [f"{report['count']} groups, {'all checks pass' if report['ok'] else 'FAILURES:'}"]
    lines += [f"  {f}" for f in report["failures"]]
    emit(s, report, "\n".join(lines),
         [("levels", lambda p: figures.catalog_summary(report, p))])
    if not report["ok"]:
        sys.exit(EXIT_FAIL)


@command()
@click.option("--families", type=click.Path(exists=True, dir_okay=False))
def identities(s: Settings, families):
    """Check the composition and substitution identities between family j-maps."""
    try:
        results = cat.run_identity_suite(cat.load_families(families))
    except (cat.CatalogError, ExprSyntaxError) as exc:
        raise InputError(str(exc)) from None
    ok = all(r.holds for r in results)
    payload = {"ok": ok, "identities": [r.to_dict() for r in results]}
    bad = [r.name for r in results if not r.holds]
    emit(s, payload, f"{len(results)} identities, " + ("all hold" if ok else "failing: " + ", ".join(bad)))
    if not ok:
        sys.exit(EXIT_FAIL)


@command("ap-scan")
@click.option("--family", help="catalog label of the family")
@click.option("--t", "t0", default="1", show_default=True)
@click.option("--D", "D0", default="1", show_default=True)
@click.option("--mod", "modulus", type=int, help="defaults to the family level")
@click.option("--pmax", type=click.IntRange(min=2, max=ec.MAX_PRIME), default=1000, show_default=True)
@click.option("--long", "long_model", help="a1,a2,a3,a4,a6 of a long Weierstrass model")
def ap_scan(s: Settings, family, t0, D0, modulus, pmax, long_model):
    """Census of a_p mod m over good primes up to pmax."""
    if long_model:
        coeffs = [_fraction(x) for x in long_model.split(",")]
        if len(coeffs) != 5:
            raise InputError("--long needs five comma separated coefficients")
        try:
            curve = ec.CurveInstance.from_long(*coeffs)
        except ec.SingularSpecialization as exc:
            raise InputError(str(exc)) from None
        source = {"long": long_model}
    elif family:
        try:
            fam = cat.load_families().families[family]
        except KeyError:
            raise InputError(f"no family labelled {family!r}") from None
        try:
            curve = ec.specialize(fam, _fraction(t0), _fraction(D0))
        except (ec.SingularSpecialization, ZeroDivisionError, ArithmeticError) as exc:
            raise InputError(f"cannot specialize {family} at t={t0}, D={D0}: {exc}") from None
        source = {"family": family, "t": t0, "D": D0}
    else:
        raise InputError("give --family or --long")
    if modulus is None:
        if not family:
            raise InputError("--mod is required without --family")
        modulus = cat.parse_label(family)[0]
    if modulus < 2:
        raise InputError("--mod must be at least 2")
    census = ec.trace_census(curve, modulus, pmax, threads=s.threads).to_dict()
    payload = {**census, "curve": curve.to_dict(), "bad_primes": list(curve.bad_primes), "source": source}
    emit(s, payload, f"{len(census['sequence'])} primes, missing residues mod {modulus}: {census['missing']}",
         [("census", lambda p: figures.census_histogram(census, p))])


@command()
@click.option("--group", "ref", required=True, help="catalog label or JSON subgroup record")
@click.option("--tilde", is_flag=True, help="use <G, -I>")
def genus(s: Settings, ref, tilde):
    """Index, elliptic points, cusps and genus of the modular curve of a group."""
    G = load_group(ref, s.cap)
    if tilde:
        G = gl.adjoin_minus_identity(G)
    rep = mc.genus(G).to_dict()
    payload = {"group": ref, "m": G.m, "tilde": tilde, **rep}
    emit(s, payload, f"genus {rep['genus']} (index {rep['mu']}, {rep['cusps']} cusps)")


@command("lt")
@click.option("--group", "ref", required=True, help="catalog label or JSON subgroup record")
@click.option("--r", "r", type=int, required=True)
@click.option("--L", "L", type=click.IntRange(min=2), default=100, show_default=True)
@click.option("--digits", type=click.IntRange(min=5, max=200), default=lt.DEFAULT_DIGITS, show_default=True)
def lt_cmd(s: Settings, ref, r, L, digits):
    """Truncated Euler product for the Lang-Trotter constant of a group and trace."""
    G = load_group(ref, s.cap)
    res = lt.lt_truncated(G, r, L, digits)
    payload = {"group": ref, **res.to_dict()}
    emit(s, payload, f"m_E = {res.m_E}, zero = {res.zero}, value = {res.truncated_value}",
         [("partial", lambda p: figures.lt_partial_products(
             [(ell, float(v)) for ell, v in res.partial_products()], p, f"{ref}, r = {r}"))])


@command()
@click.option("--group", "ref", required=True, help="catalog label or JSON subgroup record")
@click.option("--split", "m1", type=int, help="first coprime factor (default: first prime-power part)")
def goursat(s: Settings, ref, m1):
    """Decompose a composite-level group as a fibered product and rebuild it."""
    G = load_group(ref, s.cap)
    try:
        res = mt.goursat_roundtrip(G, m1, None if m1 is None else G.m // m1)
    except (ValueError, ArithmeticError) as exc:
        raise InputError(str(exc)) from None
    emit(s, {"group": ref, **res},
         f"{res['m1']} x {res['m2']}, quotient {res['quotient_shape']}, roundtrip {res['roundtrip']}")
    if not res["roundtrip"]:
        sys.exit(EXIT_FAIL)


def run(argv=None) -> int:
    """Console entry point; maps click usage errors to the input-error code."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except (gl.ClosureCapExceeded, OSError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_INPUT
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(run())
