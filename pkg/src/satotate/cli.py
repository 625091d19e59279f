"""Command-line interface.

Verbs: expand, fetch, measure, density, dominance, figures, first-sign,
bracket.  Global flags: --config (key = value file; command-line flags win),
--cache-dir, --out, --threads (reserved; execution is single-process and
deterministic), --seedless (lifts the quadrature cell budget).

Exit codes: 0 success, 2 usage/config error, 3 data or coverage error,
4 numerical budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bundled, charts, coeffs, counting, measures, region
from .errors import (
    BudgetError,
    CompositionOverflow,
    ConfigError,
    CoverageError,
    DomainError,
    HypothesisError,
    InvariantError,
    NetworkError,
    ParseError,
    RecipeError,
    SatotateError,
    TraceError,
    OutOfRangeError,
)

_USAGE_ERRORS = (ConfigError, DomainError)
_DATA_ERRORS = (
    ParseError,
    InvariantError,
    CoverageError,
    NetworkError,
    RecipeError,
    OutOfRangeError,
)
_BUDGET_ERRORS = (BudgetError, CompositionOverflow, TraceError, HypothesisError)

_D22_FLAG = (
    "note: the (2,2) density is 0.523761 by both the closed form and certified "
    "quadrature; the sometimes-quoted figure 0.534 matches neither route and is "
    "treated as a misprint."
)


@dataclass
class RunConfig:
    """Run settings; file values are overridden by explicit CLI flags."""

    f: str = "5.4.a.a"
    fp: str = "6.6.a.a"
    x_max: int = 100_000
    checkpoints: int = 20
    cache_dir: str | None = None
    base_url: str = coeffs.DEFAULT_BASE_URL
    out: str = "."
    png: bool = True
    mn: tuple = ((1, 1),)
    envelope_mode: str = "Unconditional12"
    budget: int | None = 10_000_000

    def validate(self):
        if not 2 <= self.x_max <= 10**8:
            raise ConfigError(f"x_max must be in [2, 1e8], got {self.x_max}")
        if not self.mn:
            raise ConfigError("at least one (m, n) pair is required")
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        if not out.is_dir():
            raise ConfigError(f"output directory {out} is not writable")
        return self


def load_config(path):
    """Parse a ``key = value`` configuration file (# starts a comment)."""
    values = {}
    for lineno, rawline in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    cfg = RunConfig()
    for key, val in values.items():
        if key in ("f", "fp", "base_url", "out", "cache_dir", "envelope_mode"):
            setattr(cfg, key, val)
        elif key in ("x_max", "checkpoints"):
            setattr(cfg, key, int(val))
        elif key == "png":
            cfg.png = val.lower() in ("1", "true", "yes", "on")
        elif key == "mn":
            cfg.mn = _parse_mn(val)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return cfg


def _parse_mn(text):
    pairs = []
    for chunk in text.replace(" ", "").split(";"):
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"bad (m,n) pair {chunk!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if not pairs:
        raise ConfigError("no (m,n) pairs supplied")
    return tuple(pairs)


def resolve_table(label, n_max, cache_dir=None, base_url=coeffs.DEFAULT_BASE_URL):
    """Obtain a coefficient table: eta recipe, then cache file, then the
    bundled offline constructor, then the remote fetcher."""
    if label in bundled.ETA_RECIPES:
        return bundled.bundled_table(label, n_max)
    cache_dir = Path(cache_dir) if cache_dir else coeffs.default_cache_dir()
    cache_file = cache_dir / f"{label}.txt"
    if cache_file.exists():
        table = coeffs.load_coefficient_file(cache_file)
        if table.bound >= n_max:
            return coeffs._truncate_table(table, n_max)
    if label in bundled.BUNDLED_LABELS:
        return bundled.bundled_table(label, n_max)
    return coeffs.fetch_remote(label, n_max, base_url=base_url, cache_dir=cache_dir)


# -- region flags ------------------------------------------------------------------


def _add_region_flags(sub):
    sub.add_argument("--rect", help="u_lo,u_hi,v_lo,v_hi")
    sub.add_argument("--sign-product", dest="sign_product", help="m,n")
    sub.add_argument("--disk", nargs="?", const="1", help="radius (default 1)")
    sub.add_argument("--halfplane-u", action="store_true", help="the region u > 0")
    sub.add_argument("--full-square", action="store_true")
    sub.add_argument(
        "--poly-interval",
        dest="poly_interval",
        help="graded-lex coefficients of P, e.g. '0,0,0,0,1,0' for uv; "
        "combine with --interval lo,hi and --lift m,n",
    )
    sub.add_argument("--interval", default="0,inf", help="interval for --poly-interval")
    sub.add_argument("--lift", default="1,1", help="symmetric-power indices for --poly-interval")
    sub.add_argument("--region-file", help="constraint file (see docs)")


def _graded_lex_poly(tokens):
    from fractions import Fraction

    from .region import _graded_lex_monomials
    from .bipoly import Poly2

    coeffs = [Fraction(t) for t in tokens.split(",")]
    degree = 0
    while (degree + 1) * (degree + 2) // 2 < len(coeffs):
        degree += 1
    monos = list(_graded_lex_monomials(degree))
    if len(coeffs) > len(monos):
        raise ConfigError("coefficient list length is not triangular")
    return Poly2(dict(zip(monos, coeffs)))


def _region_from_args(args):
    if args.rect:
        vals = [float(t) for t in args.rect.split(",")]
        if len(vals) != 4:
            raise ConfigError("--rect needs u_lo,u_hi,v_lo,v_hi")
        return region.rect(*vals)
    if args.sign_product:
        m, n = (int(t) for t in args.sign_product.split(","))
        return region.sign_product(m, n)
    if args.disk is not None:
        return region.disk(float(args.disk))
    if args.halfplane_u:
        return region.half_plane_u_positive()
    if args.full_square:
        return region.full_square()
    if args.poly_interval:
        P = _graded_lex_poly(args.poly_interval)
        lo_s, hi_s = args.interval.split(",")
        lo = float("-inf") if lo_s in ("-inf", "") else float(lo_s)
        hi = float("inf") if hi_s in ("inf", "") else float(hi_s)
        m, n = (int(t) for t in args.lift.split(","))
        return region.region_from_poly_interval(P, measures.Interval(lo, hi), m, n)
    if args.region_file:
        return region.parse_region_file(args.region_file)
    raise ConfigError("no region specified")


# -- commands ----------------------------------------------------------------------


def cmd_expand(cfg, args):
    if args.eta:
        recipe = tuple(
            (int(d), int(e))
            for d, e in (pair.split(":") for pair in args.eta.split(","))
        )
        if args.label and args.label in bundled.ETA_RECIPES:
            descriptor = bundled.descriptor_for(args.label)
        else:
            weight = args.weight or sum(e for _, e in recipe) // 2
            level = args.level or max(d for d, _ in recipe)
            descriptor = coeffs.NewformDescriptor(
                label=args.label or f"eta.{args.eta}",
                weight=weight,
                level=level,
                eta_recipe=recipe,
                source=coeffs.Source.ETA_QUOTIENT,
            )
        table = coeffs.expand_eta_quotient(descriptor, args.n)
    elif args.label:
        table = resolve_table(args.label, args.n, cfg.cache_dir, cfg.base_url)
    else:
        raise ConfigError("expand requires --eta or --label")
    if args.out_file:
        coeffs.write_coefficient_file(args.out_file, table)
        print(f"wrote {table.bound} coefficients to {args.out_file}")
    else:
        header = (
            f"label={table.descriptor.label} k={table.descriptor.weight} "
            f"N={table.descriptor.level}"
        )
        print(header)
        for idx in range(1, table.bound + 1):
            print(f"{idx} {table.a_int(idx)}")
    return 0


def cmd_fetch(cfg, args):
    cache_dir = Path(cfg.cache_dir) if cfg.cache_dir else coeffs.default_cache_dir()
    if args.seed_bundled:
        written = bundled.seed_cache(cache_dir, args.n)
        for path in written:
            print(f"seeded {path}")
        return 0
    if not args.label:
        raise ConfigError("fetch requires --label (or --seed-bundled)")
    table = coeffs.fetch_remote(args.label, args.n, base_url=cfg.base_url, cache_dir=cache_dir)
    print(f"{table.descriptor.label}: {table.bound} coefficients cached under {cache_dir}")
    return 0


def cmd_measure(cfg, args):
    reg = _region_from_args(args)
    target = args.target
    mv = measures.mu_jst_region(reg, target, budget=cfg.budget)
    print(f"region: {reg.describe()}")
    print(f"measure = {mv.value:.9f}  (certified +- {mv.abs_error:.3g})")
    lines = [f"region,value,abs_error", f"{reg.describe()},{mv.value:.12g},{mv.abs_error:.12g}"]
    if args.rect:
        vals = [float(t) for t in args.rect.split(",")]
        closed = measures.mu_jst_rect(
            measures.Interval(vals[0], vals[1]), measures.Interval(vals[2], vals[3])
        ).value
        print(f"closed form (product of 1-D measures) = {closed:.9f}")
    if args.sign_product:
        m, n = (int(t) for t in args.sign_product.split(","))
        closed = measures.d_mn(m, n)
        print(f"closed form d({m},{n}) = {closed:.9f}   |difference| = {abs(closed - mv.value):.2e}")
        if (m, n) == (2, 2):
            print(_D22_FLAG)
    if args.grid_bracket:
        for m_res in _parse_int_list(args.m or "64"):
            approx = region.classify_boxes(reg, m_res)
            n_obs, bound = region.boundary_bound_check(reg, m_res, approx)
            merge = region.strip_merge(reg, m_res, approx)
            print(
                f"m={m_res:4d}  bracket=[{approx.mu_low:.9f}, {approx.mu_high:.9f}] "
                f"width={approx.mu_high - approx.mu_low:.3g}  N={n_obs} (bound {bound:.0f})  "
                f"max strip components={int(merge.per_strip_counts.max(initial=0))}"
            )
    if args.out_csv:
        Path(args.out_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _parse_int_list(text):
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _series_commands(cfg, args, kind):
    x_max = args.x_max or cfg.x_max
    table_f = resolve_table(args.f or cfg.f, x_max, cfg.cache_dir, cfg.base_url)
    table_fp = resolve_table(args.fp or cfg.fp, x_max, cfg.cache_dir, cfg.base_url)
    checkpoints = counting.default_checkpoints(x_max, cfg.checkpoints)
    out = Path(cfg.out)
    pairs = _parse_mn(args.mn) if args.mn else cfg.mn
    builder = (
        counting.sign_density_series if kind == "density" else counting.dominance_density_series
    )
    for m, n in pairs:
        rep = builder(table_f, table_fp, m, n, checkpoints)
        stem = f"{kind}_{m}_{n}"
        rep.write_csv(out / f"{stem}.csv")
        final = rep.final()
        print(
            f"{kind} ({m},{n}): final empirical {final.emp_density:.4f} "
            f"vs predicted {final.pred_density:.6f}  -> {out / (stem + '.csv')}"
        )
        if cfg.png:
            xs = [r.x for r in rep.rows]
            series = [charts.Series(f"({m},{n})", tuple(r.emp_density for r in rep.rows), final.pred_density)]
            charts.render_png(out / f"{stem}.png", xs, series, f"{kind} ({m},{n})", "x", "density")
    return 0


def cmd_figures(cfg, args):
    """Reproduce the two summary figures: simultaneous-sign densities for
    (1,1), (2,2), (1,2) and dominance densities for (1,3), (2,2), (2,3)."""
    x_max = args.x_max or cfg.x_max
    table_f = resolve_table(args.f or cfg.f, x_max, cfg.cache_dir, cfg.base_url)
    table_fp = resolve_table(args.fp or cfg.fp, x_max, cfg.cache_dir, cfg.base_url)
    checkpoints = counting.default_checkpoints(x_max, cfg.checkpoints)
    if not checkpoints:
        raise ConfigError("empty checkpoint grid")
    out = Path(cfg.out)
    label_f, label_fp = table_f.descriptor.label, table_fp.descriptor.label

    def emit(name, kind, pairs, title):
        reports = {}
        for m, n in pairs:
            builder = (
                counting.sign_density_series if kind == "sign" else counting.dominance_density_series
            )
            reports[(m, n)] = builder(table_f, table_fp, m, n, checkpoints)
        xs = [r.x for r in next(iter(reports.values())).rows]
        pi_xs = [r.pi_x for r in next(iter(reports.values())).rows]
        columns = {}
        series = []
        for (m, n), rep in reports.items():
            emp = tuple(r.emp_density for r in rep.rows)
            pred = rep.rows[0].pred_density
            columns[f"{m}_{n}"] = (emp, pred)
            series.append(charts.Series(f"({m},{n})", emp, pred))
        charts.write_multi_series_csv(out / f"{name}.csv", xs, pi_xs, columns)
        charts.render_svg(out / f"{name}.svg", xs, series, title, "x", "density")
        if cfg.png:
            charts.render_png(out / f"{name}.png", xs, series, title, "x", "density")
        print(f"{name}: wrote {out / (name + '.csv')} and {out / (name + '.svg')}")
        return reports

    emit(
        "figure1", "sign", [(1, 1), (2, 2), (1, 2)],
        f"Density of primes with positive coefficient products: {label_f} vs {label_fp}",
    )
    emit(
        "figure2", "dominance", [(1, 3), (2, 2), (2, 3)],
        f"Density of primes with dominated coefficients: {label_f} vs {label_fp}",
    )
    print(_D22_FLAG)
    return 0


def cmd_first_sign(cfg, args):
    x_max = args.x_max or cfg.x_max
    table_f = resolve_table(args.f or cfg.f, x_max, cfg.cache_dir, cfg.base_url)
    table_fp = resolve_table(args.fp or cfg.fp, x_max, cfg.cache_dir, cfg.base_url)
    pairs = _parse_mn(args.mn) if args.mn else cfg.mn
    for m, n in pairs:
        for rule in counting.EXCLUSION_RULES:
            res = counting.first_sign_change(table_f, table_fp, m, n, rule)
            if res.found:
                p = res.prime
                detail = ""
                if m == 1 and n == 1:
                    detail = f"  [A(p)={table_f.a_int(p)}, A'(p)={table_fp.a_int(p)}]"
                print(f"({m},{n}) {rule}: first sign change at p = {p}{detail}")
            else:
                print(f"({m},{n}) {rule}: no sign change up to {res.searched_bound}")
        if args.d is not None:
            df, dfp = table_f.descriptor, table_fp.descriptor
            bound = counting.theoretical_first_sign_bound(
                m, n, df.weight, dfp.weight, df.level, dfp.level, args.d
            )
            print(
                f"({m},{n}) doubling-grid theoretical bound with d={args.d}: "
                f"x = 2^{bound.bit_length() - 1}"
            )
    return 0


def cmd_bracket(cfg, args):
    reg = _region_from_args(args)
    out = Path(cfg.out)
    rows = ["m,mu_low,mu_high,width,boundary_count,area_bound,max_strip_components"]
    for m_res in _parse_int_list(args.m or "16,32,64,128"):
        approx = region.classify_boxes(reg, m_res)
        n_obs, bound = region.boundary_bound_check(reg, m_res, approx)
        merge = region.strip_merge(reg, m_res, approx)
        width = approx.mu_high - approx.mu_low
        print(
            f"m={m_res:4d}  [{approx.mu_low:.9f}, {approx.mu_high:.9f}]  width={width:.3g}  "
            f"N={n_obs} <= {bound:.0f}  strip components <= {int(merge.per_strip_counts.max(initial=0))}"
        )
        rows.append(
            f"{m_res},{approx.mu_low:.12g},{approx.mu_high:.12g},{width:.12g},"
            f"{n_obs},{bound:.12g},{int(merge.per_strip_counts.max(initial=0))}"
        )
    (out / f"bracket_{reg.label.replace('/', '_')}.csv").write_text("\n".join(rows) + "\n", "utf-8")
    return 0


# -- entry point --------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="satotate",
        description="Joint equidistribution statistics for newform coefficients",
        epilog="The coefficient cache directory defaults to ~/.cache/satotate and "
        "can be overridden with the SATOTATE_CACHE_DIR environment variable.",
    )
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="reserved; runs are single-process")
    parser.add_argument("--seedless", action="store_true", help="lift the quadrature cell budget")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="expand an eta quotient to a coefficient file")
    p.add_argument("--eta", help="recipe as divisor:exponent pairs, e.g. 1:4,5:4")
    p.add_argument("--label")
    p.add_argument("--weight", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out-file", dest="out_file")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("fetch", help="fetch (or seed) cached coefficient tables")
    p.add_argument("--label")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed-bundled", action="store_true", help="seed the cache offline")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("measure", help="joint measure of a region")
    _add_region_flags(p)
    p.add_argument("--target", type=float, default=1e-6)
    p.add_argument("--grid-bracket", action="store_true")
    p.add_argument("--m", help="grid resolutions, e.g. 16,32,64")
    p.add_argument("--out-csv", dest="out_csv")
    p.set_defaults(func=cmd_measure)

    for kind in ("density", "dominance"):
        p = sub.add_parser(kind, help=f"{kind} series to CSV")
        p.add_argument("--f")
        p.add_argument("--fp")
        p.add_argument("--mn", help="pairs m,n separated by ';'")
        p.add_argument("--x-max", dest="x_max", type=int)
        p.set_defaults(func=lambda cfg, args, _kind=kind: _series_commands(cfg, args, _kind))

    p = sub.add_parser("figures", help="reproduce the two summary figures")
    p.add_argument("--f")
    p.add_argument("--fp")
    p.add_argument("--x-max", dest="x_max", type=int)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("first-sign", help="first simultaneous sign change")
    p.add_argument("--f")
    p.add_argument("--fp")
    p.add_argument("--mn")
    p.add_argument("--x-max", dest="x_max", type=int)
    p.add_argument("--d", type=float, help="envelope constant for the theoretical bound")
    p.set_defaults(func=cmd_first_sign)

    p = sub.add_parser("bracket", help="certified grid bracket of a region")
    _add_region_flags(p)
    p.add_argument("--m", help="grid resolutions, default 16,32,64,128")
    p.set_defaults(func=cmd_bracket)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.cache_dir:
            cfg.cache_dir = args.cache_dir
        if args.out:
            cfg.out = args.out
        if args.seedless:
            cfg.budget = None
        cfg.validate()
        return args.func(cfg, args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _BUDGET_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SatotateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
