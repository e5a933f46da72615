"""Batch experiment harness exposing the library as subcommands.

Each subcommand reads a node source (JSON file or generated family), an
optional function source (JSON file or builtin series spec), runs one
experiment, and emits a CSV or JSON table. Magnitudes are rendered as exact
decimal strings, never binary floats, so outputs written at different working
precisions stay comparable. Identical flags and seed produce byte-identical
output.

Exit codes: 0 success, 1 property-check failure, 2 configuration error,
3 numeric or construction failure.
"""

from __future__ import annotations

import functools
import json
import random
import re
import sys
from dataclasses import dataclass

import click
from mpmath import mpf, workprec

from .counterexample import EscalationPolicy, build_sequence, verify_growth
from .criterion import (
    circle_family,
    conj_kernel,
    criterion_profile,
    generate_nodes,
    line_family,
)
from .divdiff import NodeSequence, analytic_series, conjugation, delta_table
from .errors import ConfigError, NumericError, ParseError
from .funcmodel import TaylorSeries2, eval2, restrict_to_line, series_from_spec
from .interpolate import default_zgrid, eval_EN, eval_tail, identity_report
from .mobius import (
    inverse_homography,
    line_factor_check,
    make_context,
    pushforward,
    theta_bound,
    theta_infinity,
    to_bounded,
)
from .precision import (
    DEFAULT_PRECISION,
    ApComplex,
    check_precision,
    parse_decimal,
    render_decimal,
)

DEFAULT_GRID = "5x5@0.5+10"

_GRID_RE = re.compile(r"^(\d+)x(\d+)@([^+]+)(?:\+(\d+))?$")


# -- shared configuration ------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Validated flag bundle shared by the subcommands."""

    precision_bits: int = DEFAULT_PRECISION
    max_order: object = None
    node_source: object = None
    function_source: object = None
    n_min: int = 1
    n_max: int = 1
    grid_spec: str = DEFAULT_GRID
    out_path: object = None
    seed: int = 0

    def __post_init__(self):
        check_precision(self.precision_bits)
        if self.n_min < 1:
            raise ConfigError("N range must start at 1 or above")
        if self.n_min > self.n_max:
            raise ConfigError(
                "empty N range: n_min=%d > n_max=%d" % (self.n_min, self.n_max)
            )
        if self.max_order is not None and self.max_order < 0:
            raise ConfigError("max order must be nonnegative")
        _parse_grid(self.grid_spec)


def _parse_grid(spec):
    """Grid spec SIDExSIDE@RADIUS[+EXTRA], e.g. the default 5x5@0.5+10."""
    m = _GRID_RE.match(spec)
    if not m:
        raise ConfigError("grid spec must look like 5x5@0.5+10, got %r" % (spec,))
    side_a, side_b = int(m.group(1)), int(m.group(2))
    if side_a != side_b:
        raise ConfigError("grid must be square, got %dx%d" % (side_a, side_b))
    if side_a < 1:
        raise ConfigError("grid side must be at least 1")
    extra = int(m.group(4)) if m.group(4) else 0
    return side_a, m.group(3), extra


def _grid_points(cfg):
    side, radius, extra = _parse_grid(cfg.grid_spec)
    return default_zgrid(
        cfg.precision_bits, radius=radius, side=side, extra=extra, seed=cfg.seed
    )


def _parse_point(text, bits):
    """Complex flag value as RE or RE,IM in decimal notation."""
    parts = text.split(",")
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise ConfigError("complex value must be RE or RE,IM, got %r" % (text,))
    with workprec(bits):
        return ApComplex(
            parse_decimal(parts[0], bits), parse_decimal(parts[1], bits), bits
        )


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError("%s is not valid JSON: %s" % (path, exc)) from exc


def _load_nodes(source, bits, seed, count=None):
    """Node source: a JSON file with a "nodes" list, or family:KIND:ARGS[:COUNT].

    Families: family:line:A,B,C:COUNT for the line A*Re+B*Im+C=0 and
    family:circle:RE,IM,R:COUNT for the circle of radius R around RE+IM*i.
    """
    if source is None:
        raise ConfigError("a node source is required (--nodes)")
    if source.startswith("family:"):
        parts = source.split(":")
        kind = parts[1] if len(parts) > 1 else ""
        if kind not in ("line", "circle") or len(parts) not in (3, 4):
            raise ConfigError(
                "family spec must be family:line:A,B,C[:COUNT] or "
                "family:circle:RE,IM,R[:COUNT], got %r" % (source,)
            )
        coords = parts[2].split(",")
        if len(coords) != 3:
            raise ConfigError("family %r needs three coordinates" % (kind,))
        fam_count = None
        if len(parts) == 4:
            try:
                fam_count = int(parts[3])
            except ValueError as exc:
                raise ConfigError("bad family count %r" % (parts[3],)) from exc
        if kind == "line":
            family = line_family(coords[0], coords[1], coords[2], fam_count)
        else:
            family = circle_family((coords[0], coords[1]), coords[2], fam_count)
        return generate_nodes(family, count=count, seed=seed, precision_bits=bits)
    seq = NodeSequence.from_json_obj(_load_json(source), bits)
    if count is not None:
        return seq.first(count)
    return seq


def _load_function(source, bits):
    """Function source: builtin:SPEC (poly:, exp_sum:, expcos:) or a JSON file."""
    if source is None:
        raise ConfigError("a function source is required (--function)")
    if source.startswith("builtin:"):
        return series_from_spec(source[len("builtin:") :], bits)
    return TaylorSeries2.from_json_obj(_load_json(source), bits)


def _parse_kernel(spec, bits):
    """Scalar kernel spec for dd and counterexample.

    conjugation          plain zeta -> conj(zeta)
    conj-kernel[:Q[:S]]  conj(zeta)^S / (1+|zeta|^2)^Q, defaults Q=1, S=Q
    identity             zeta -> zeta (holomorphic)
    analytic:C0,C1,...   truncated power series with real decimal coefficients
    """
    parts = spec.split(":")
    name = parts[0]
    if name == "conjugation" and len(parts) == 1:
        return conjugation()
    if name == "conj-kernel" and len(parts) <= 3:
        try:
            q = int(parts[1]) if len(parts) > 1 else 1
            s = int(parts[2]) if len(parts) > 2 else None
        except ValueError as exc:
            raise ConfigError("kernel powers must be integers in %r" % (spec,)) from exc
        return conj_kernel(q, s)
    if name == "identity" and len(parts) == 1:
        return analytic_series([0, 1])
    if name == "analytic" and len(parts) == 2:
        with workprec(bits):
            coeffs = [parse_decimal(c, bits) for c in parts[1].split(",")]
        return analytic_series(coeffs)
    raise ConfigError("unknown kernel spec %r" % (spec,))


def _require_span(nodes, n_max):
    if n_max > len(nodes):
        raise ConfigError(
            "N range reaches %d but only %d nodes are available" % (n_max, len(nodes))
        )


def _emit(text, out_path):
    payload = text if text.endswith("\n") else text + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=False)


def _json_text(obj):
    return json.dumps(obj, indent=2)


def _guarded(fn):
    """Map the shared error branches onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(**kwargs):
        try:
            code = fn(**kwargs)
        except ConfigError as exc:
            click.echo("config error: %s" % (exc,), err=True)
            sys.exit(2)
        except NumericError as exc:
            click.echo("numeric failure: %s" % (exc,), err=True)
            sys.exit(3)
        sys.exit(0 if code is None else code)

    return wrapper


def _magnitude(value, bits):
    with workprec(bits):
        return abs(value.to_mpc())


# -- command group -------------------------------------------------------------------


@click.group()
def main():
    """Reconstruction-from-lines experiment tables (CSV/JSON)."""


_precision_opt = click.option(
    "--precision", default=DEFAULT_PRECISION, show_default=True, help="Working bits."
)
_seed_opt = click.option(
    "--seed", default=0, show_default=True, help="Deterministic RNG seed."
)
_out_opt = click.option(
    "--out", default=None, help="Write the primary table here instead of stdout."
)
_format_opt = click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
    help="Output encoding.",
)
_grid_opt = click.option(
    "--grid", default=DEFAULT_GRID, show_default=True, help="Evaluation grid spec."
)
_nodes_opt = click.option(
    "--nodes", "node_source", default=None, help="Node file or family:KIND:ARGS."
)
_function_opt = click.option(
    "--function",
    "function_source",
    default=None,
    help="Series file or builtin:SPEC.",
)


# -- converge ------------------------------------------------------------------------


@main.command("converge")
@_precision_opt
@_nodes_opt
@_function_opt
@click.option("--n-min", default=2, show_default=True, help="Smallest line count.")
@click.option("--n-max", default=8, show_default=True, help="Largest line count.")
@_grid_opt
@_seed_opt
@_out_opt
@_format_opt
@_guarded
def cmd_converge(precision, node_source, function_source, n_min, n_max, grid, seed, out, fmt):
    """Sup-grid interpolation error against the line count N."""
    cfg = RunConfig(
        precision_bits=precision,
        node_source=node_source,
        function_source=function_source,
        n_min=n_min,
        n_max=n_max,
        grid_spec=grid,
        out_path=out,
        seed=seed,
    )
    bits = cfg.precision_bits
    nodes = _load_nodes(cfg.node_source, bits, cfg.seed)
    _require_span(nodes, cfg.n_max)
    f = _load_function(cfg.function_source, bits)
    points = _grid_points(cfg)
    restrictions = [restrict_to_line(f, nodes[q], bits) for q in range(cfg.n_max)]
    rows = []
    prev = None
    for n in range(cfg.n_min, cfg.n_max + 1):
        with workprec(bits):
            sup = mpf(0)
            for z1, z2 in points:
                gap = abs(
                    eval_EN(f, nodes, n, z1, z2, restrictions[:n]).to_mpc()
                    - eval2(f, z1, z2).to_mpc()
                )
                if gap > sup:
                    sup = gap
            ratio = sup / prev if prev is not None and prev > 0 else None
        rows.append((n, sup, ratio))
        prev = sup
    if fmt == "csv":
        lines = ["n,sup_error,ratio"]
        for n, sup, ratio in rows:
            lines.append(
                "%d,%s,%s"
                % (n, render_decimal(sup), render_decimal(ratio) if ratio is not None else "")
            )
        _emit("\n".join(lines), cfg.out_path)
    else:
        _emit(
            _json_text(
                {
                    "precision_bits": bits,
                    "rows": [
                        {
                            "n": n,
                            "sup_error": render_decimal(sup),
                            "ratio": render_decimal(ratio) if ratio is not None else None,
                        }
                        for n, sup, ratio in rows
                    ],
                }
            ),
            cfg.out_path,
        )
    return 0


# -- criterion -----------------------------------------------------------------------


@main.command("criterion")
@_precision_opt
@_nodes_opt
@click.option("--p-max", default=10, show_default=True, help="Largest difference order.")
@click.option("--q-max", default=3, show_default=True, help="Largest kernel power.")
@_seed_opt
@_out_opt
@_format_opt
@_guarded
def cmd_criterion(precision, node_source, p_max, q_max, seed, out, fmt):
    """Normalized conjugate-kernel divided-difference profile."""
    cfg = RunConfig(
        precision_bits=precision, node_source=node_source, out_path=out, seed=seed
    )
    bits = cfg.precision_bits
    nodes = _load_nodes(cfg.node_source, bits, cfg.seed)
    profile = criterion_profile(nodes, p_max, q_max, bits)
    if fmt == "csv":
        _emit(profile.to_csv_text(), cfg.out_path)
    else:
        _emit(_json_text(profile.to_json_obj()), cfg.out_path)
    return 0


# -- counterexample ------------------------------------------------------------------


@main.command("counterexample")
@_precision_opt
@click.option("--stages", default=3, show_default=True, help="Stages to construct.")
@click.option(
    "--max-bits",
    default=8192,
    show_default=True,
    help="Precision-escalation ceiling.",
)
@click.option(
    "--kernel",
    default="conj-kernel",
    show_default=True,
    help="Scalar kernel spec (see dd --help).",
)
@_out_opt
@_format_opt
@_guarded
def cmd_counterexample(precision, stages, max_bits, kernel, out, fmt):
    """Adversarial axis nodes plus per-stage growth certificates.

    The growth table goes to stdout; --out receives the node sequence as
    JSON. Exits 0 only when every stage certificate passes.
    """
    cfg = RunConfig(precision_bits=precision, out_path=out)
    bits = cfg.precision_bits
    f = _parse_kernel(kernel, bits)
    policy = EscalationPolicy(start_bits=bits, max_bits=max_bits)
    seq = build_sequence(f, stages, policy)
    report = verify_growth(seq, f)
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(_json_text(seq.to_json_obj()) + "\n")
    if fmt == "csv":
        click.echo(report.to_csv_text(), nl=False)
    else:
        click.echo(
            _json_text({"sequence": seq.to_json_obj(), "growth": report.to_json_obj()})
        )
    return 0 if report.all_passed else 1


# -- identity ------------------------------------------------------------------------


@main.command("identity")
@_precision_opt
@_nodes_opt
@_function_opt
@click.option("--n-min", default=1, show_default=True, help="Smallest line count.")
@click.option("--n-max", default=4, show_default=True, help="Largest line count.")
@click.option(
    "--max-order",
    default=None,
    type=int,
    help="Cap the tail sum at this total degree (breaks the identity if low).",
)
@click.option(
    "--tolerance",
    default="1e-55",
    show_default=True,
    help="Largest acceptable residual magnitude.",
)
@_grid_opt
@_seed_opt
@_out_opt
@_format_opt
@_guarded
def cmd_identity(precision, node_source, function_source, n_min, n_max, max_order, tolerance, grid, seed, out, fmt):
    """Residual of f = E_N - R_N + tail swept over the grid."""
    cfg = RunConfig(
        precision_bits=precision,
        max_order=max_order,
        node_source=node_source,
        function_source=function_source,
        n_min=n_min,
        n_max=n_max,
        grid_spec=grid,
        out_path=out,
        seed=seed,
    )
    bits = cfg.precision_bits
    nodes = _load_nodes(cfg.node_source, bits, cfg.seed)
    _require_span(nodes, cfg.n_max)
    f = _load_function(cfg.function_source, bits)
    tail_f = f
    if cfg.max_order is not None and cfg.max_order < f.max_order:
        tail_f = f.truncated(cfg.max_order)
    points = _grid_points(cfg)
    with workprec(bits):
        tol = parse_decimal(tolerance, bits)
    rows = []
    with workprec(bits):
        worst = mpf(0)
    for n in range(cfg.n_min, cfg.n_max + 1):
        for idx, (z1, z2) in enumerate(points):
            rep = identity_report(f, nodes, n, z1, z2)
            residual = rep.identity_residual
            if tail_f is not f:
                residual = (
                    rep.value_en
                    - rep.value_rn_lagrange
                    + eval_tail(tail_f, n, z1, z2)
                    - rep.value_f
                )
            with workprec(bits):
                mag = abs(residual.to_mpc())
                if mag > worst:
                    worst = mag
            rows.append((n, idx, mag, rep.cross_form_gap))
    passed = worst <= tol
    if fmt == "csv":
        lines = ["n,point,residual,cross_form_gap"]
        for n, idx, mag, gap in rows:
            lines.append(
                "%d,%d,%s,%s" % (n, idx, render_decimal(mag), render_decimal(gap))
            )
        _emit("\n".join(lines), cfg.out_path)
    else:
        _emit(
            _json_text(
                {
                    "precision_bits": bits,
                    "tolerance": tolerance,
                    "max_residual": render_decimal(worst),
                    "passed": passed,
                    "rows": [
                        {
                            "n": n,
                            "point": idx,
                            "residual": render_decimal(mag),
                            "cross_form_gap": render_decimal(gap),
                        }
                        for n, idx, mag, gap in rows
                    ],
                }
            ),
            cfg.out_path,
        )
    return 0 if passed else 1


# -- mobius --------------------------------------------------------------------------


@main.command("mobius")
@_precision_opt
@_nodes_opt
@click.option(
    "--eta-inf",
    required=True,
    help="Reduction center RE[,IM], or 'inf' for the rotation variant.",
)
@click.option(
    "--phi",
    default="0",
    show_default=True,
    help="Rotation angle (radians, decimal) for --eta-inf inf.",
)
@click.option(
    "--tolerance",
    default="1e-60",
    show_default=True,
    help="Bound for unitarity, line-factor, and round-trip residuals.",
)
@click.option(
    "--coherence-tolerance",
    default="1e-50",
    show_default=True,
    help="Bound for the small-N reduction-coherence residual.",
)
@_seed_opt
@_out_opt
@_guarded
def cmd_mobius(precision, node_source, eta_inf, phi, tolerance, coherence_tolerance, seed, out):
    """Homography reduction report: theta list, bounds, residuals (JSON)."""
    cfg = RunConfig(precision_bits=precision, node_source=node_source, out_path=out, seed=seed)
    bits = cfg.precision_bits
    nodes = _load_nodes(cfg.node_source, bits, cfg.seed)
    if eta_inf == "inf":
        thetas = theta_infinity(nodes, phi, bits)
        _emit(
            _json_text(
                {
                    "mode": "rotation-at-infinity",
                    "phi": phi,
                    "precision_bits": bits,
                    "theta": [t.to_json_obj() for t in thetas],
                }
            ),
            cfg.out_path,
        )
        return 0
    center = _parse_point(eta_inf, bits)
    ctx = make_context(nodes, center, bits)
    thetas = to_bounded(ctx)
    bound = theta_bound(ctx)
    with workprec(bits):
        tol = parse_decimal(tolerance, bits)
        coh_tol = parse_decimal(coherence_tolerance, bits)
        max_mod = mpf(0)
        round_trip = mpf(0)
        for node, theta in zip(nodes, thetas):
            m = abs(theta.to_mpc())
            if m > max_mod:
                max_mod = m
            back = abs(inverse_homography(ctx, theta).to_mpc() - node.to_mpc())
            if back > round_trip:
                round_trip = back
    rng = random.Random(cfg.seed)
    with workprec(bits):
        line_res = mpf(0)
        for node, theta in zip(nodes, thetas):
            probes = [(theta, ApComplex(1, 0, bits))]
            for _ in range(2):
                probes.append((_random_point(rng, bits), _random_point(rng, bits)))
            for zeta in probes:
                m = abs(line_factor_check(ctx, node, zeta).to_mpc())
                if m > line_res:
                    line_res = m
    coherence = _coherence_residual(ctx, nodes, thetas, rng, bits)
    unitarity = ctx.unitarity_defect()
    passed = (
        max_mod <= bound
        and unitarity <= tol
        and line_res <= tol
        and round_trip <= tol
        and coherence <= coh_tol
    )
    _emit(
        _json_text(
            {
                "eta_inf": center.to_json_obj(),
                "precision_bits": bits,
                "theta": [t.to_json_obj() for t in thetas],
                "theta_bound": render_decimal(bound),
                "max_theta_modulus": render_decimal(max_mod),
                "unitarity_defect": render_decimal(unitarity),
                "max_line_factor_residual": render_decimal(line_res),
                "max_round_trip_residual": render_decimal(round_trip),
                "reduction_coherence_residual": render_decimal(coherence),
                "passed": passed,
            }
        ),
        cfg.out_path,
    )
    return 0 if passed else 1


def _random_point(rng, bits):
    # dyadic numerators keep the draw exactly representable at any precision
    with workprec(bits):
        return ApComplex(
            mpf(rng.randint(-64, 64)) / 128, mpf(rng.randint(-64, 64)) / 128, bits
        )


def _coherence_residual(ctx, nodes, thetas, rng, bits):
    """Largest frame-change defect of the interpolant on random polynomials."""
    n = min(4, len(nodes))
    with workprec(bits):
        worst = mpf(0)
        for _ in range(3):
            coeffs = {}
            for k in range(n + 2):
                for m in range(n + 2 - k):
                    coeffs[(k, m)] = _random_point(rng, bits)
            f = TaylorSeries2(coeffs, n + 1, bits)
            g = pushforward(f, ctx)
            z1, z2 = _random_point(rng, bits), _random_point(rng, bits)
            u1, u2 = ctx.apply_unitary(z1, z2)
            gap = abs(
                eval_EN(f, nodes, n, z1, z2).to_mpc()
                - eval_EN(g, thetas, n, u1, u2).to_mpc()
            )
            if gap > worst:
                worst = gap
    return worst


# -- dd ------------------------------------------------------------------------------


@main.command("dd")
@_precision_opt
@_nodes_opt
@click.option(
    "--kernel",
    default="conjugation",
    show_default=True,
    help="conjugation | conj-kernel[:Q[:S]] | identity | analytic:C0,C1,...",
)
@click.option(
    "--max-order", default=None, type=int, help="Use only the first MAX_ORDER+1 nodes."
)
@_seed_opt
@_out_opt
@_format_opt
@_guarded
def cmd_dd(precision, node_source, kernel, max_order, seed, out, fmt):
    """Raw divided-difference table of a scalar kernel over the nodes."""
    cfg = RunConfig(
        precision_bits=precision,
        max_order=max_order,
        node_source=node_source,
        out_path=out,
        seed=seed,
    )
    bits = cfg.precision_bits
    nodes = _load_nodes(cfg.node_source, bits, cfg.seed)
    if cfg.max_order is not None:
        nodes = nodes.first(cfg.max_order + 1)
    h = _parse_kernel(kernel, bits)
    table = delta_table(h, nodes, bits)
    if fmt == "csv":
        _emit(table.to_csv_text(), cfg.out_path)
    else:
        rows = []
        for p in range(table.order() + 1):
            rows.append(
                [table.entry(p, k).to_json_obj() for k in range(table.order() + 1 - p)]
            )
        _emit(
            _json_text(
                {
                    "precision_bits": bits,
                    "nodes": [z.to_json_obj() for z in nodes],
                    "rows": rows,
                }
            ),
            cfg.out_path,
        )
    return 0


if __name__ == "__main__":
    main()
