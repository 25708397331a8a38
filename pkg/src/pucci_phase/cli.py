"""Command-line interface.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure or an
unresolved verdict.  ``LOGLEVEL`` (error, warn, info, debug) sets logging on
stderr.  A key-value config file (``key = value`` per line, ``#`` comments,
keys named after the long flags) supplies defaults that flags override.
"""
from __future__ import annotations

import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from . import classify as C
from . import flow as F
from . import radial as R
from .field import (OnInterface, dulac_line_integral, dulac_phi, dulac_weight, lines,
                    vector_field_array)
from .params import ParamsError, exponents, make_params
from .stationary import Kind, Label, classify_stationary, m0_in_quadrant, stationary_points

log = logging.getLogger("pucci_phase")

EXIT_USAGE = 2
EXIT_NUMERIC = 3

LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
          "info": logging.INFO, "debug": logging.DEBUG}


# -- formatting ----------------------------------------------------------------

def fmt(x) -> str:
    """Float with 17 significant digits; integers and strings unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, floats with 17 digits, NaN as null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, str):
        import json
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "value"):
        return to_json(obj.value, indent, _level)
    return to_json(str(obj), indent, _level)


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# -- config ----------------------------------------------------------------------

@dataclass
class RunConfig:
    """Flag values as stored in a config file."""

    values: dict = field(default_factory=dict)

    KEY_ALIASES = {"lambda": "lam", "Lambda": "Lam", "operator": "op"}

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        vals = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.UsageError(f"config line {n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            vals[k] = v
        return cls(vals)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dump(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.values.items())

    def default_map(self) -> dict:
        out = {}
        for k, v in self.values.items():
            name = self.KEY_ALIASES.get(k, k).replace("-", "_")
            out[name] = v
        return out


# -- shared options --------------------------------------------------------------

def param_options(f):
    f = click.option("--a", "a", type=float, default=0.0, show_default=True,
                     help="weight exponent of |x|^a")(f)
    f = click.option("--N", "N", type=int, default=3, show_default=True, help="dimension")(f)
    f = click.option("--op", "op", type=click.Choice(["plus", "minus"]), default="plus",
                     show_default=True, help="Pucci operator M+ or M-")(f)
    f = click.option("--Lambda", "Lam", type=float, default=1.0, show_default=True)(f)
    f = click.option("--lambda", "lam", type=float, default=1.0, show_default=True)(f)
    return f


def budget_options(f):
    f = click.option("--rtol", type=float, default=None, help="relative tolerance")(f)
    f = click.option("--atol", type=float, default=None, help="absolute tolerance")(f)
    f = click.option("--horizon", type=float, default=None, help="time horizon")(f)
    return f


def _params(lam, Lam, op, N, a):
    try:
        return make_params(lam, Lam, op, N, a)
    except ParamsError as exc:
        raise click.UsageError(str(exc)) from exc


def _budget(horizon=None, rtol=None, atol=None) -> F.Budget:
    b = F.Budget()
    return F.Budget(horizon if horizon is not None else b.horizon, b.max_steps,
                    rtol if rtol is not None else b.rtol,
                    atol if atol is not None else b.atol, b.hmax)


def _check_p(p: float) -> float:
    if p is None or not p > 1:
        raise click.UsageError(f"need --p > 1, got {p}")
    return p


class NumericFailure(click.ClickException):
    exit_code = EXIT_NUMERIC


NUMERIC_ERRORS = (C.Unresolved, C.BracketFailure, C.SaddleUnavailable, F.NoCycleFound,
                  F.NoReturn, F.StepSizeUnderflow, R.UnresolvedFate)


def _numeric(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except NUMERIC_ERRORS as exc:
        raise NumericFailure(f"{type(exc).__name__}: {exc}") from exc


# -- commands ------------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key-value file with default flag values")
@click.pass_context
def main(ctx, config_path):
    """Phase-plane analysis of radial solutions of M(D^2 u) + |x|^a u^p = 0."""
    level = LEVELS.get(os.environ.get("LOGLEVEL", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(level)
    if config_path:
        cfg = RunConfig.load(config_path).default_map()
        ctx.default_map = {name: cfg for name in main.commands}


@main.command("exponents")
@param_options
@click.option("--p", type=float, default=None, help="exponent for alpha(p)")
def cmd_exponents(lam, Lam, op, N, a, p):
    """Dimension-like numbers, critical exponents and their ordering."""
    prm = _params(lam, Lam, op, N, a)
    if p is not None:
        _check_p(p)
    ex = exponents(prm, p)
    out = ex.as_dict()
    out["alpha"] = None if p is None else ex.alpha
    out["p"] = p
    out["ordering_holds"] = ex.ordering_holds()
    out["params"] = prm.as_dict()
    click.echo(to_json(out))


def _parse_point(text: str) -> tuple[float, float]:
    try:
        x, z = (float(s) for s in text.split(","))
    except (ValueError, AttributeError):
        raise click.BadParameter(f"expected 'X,Z', got {text!r}", param_hint="seed point")
    if not (math.isfinite(x) and math.isfinite(z)):
        raise click.BadParameter("coordinates must be finite", param_hint="seed point")
    return x, z


@main.command("orbit")
@param_options
@budget_options
@click.option("--p", type=float, required=True)
@click.option("--seed", default="gamma", show_default=True,
              help="gamma, upsilon, point (followed by X,Z) or X,Z")
@click.argument("coords", required=False)
@click.option("--direction", type=click.Choice(["forward", "backward"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="trajectory CSV")
@click.option("--events", "events_path", type=click.Path(dir_okay=False), default=None,
              help="events JSON (default: <out>.events.json)")
def cmd_orbit(lam, Lam, op, N, a, horizon, atol, rtol, p, seed, coords, direction, out,
              events_path):
    """Integrate one orbit; write t,X,Z,region CSV and an events JSON."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    budget = _budget(horizon, rtol, atol)
    s = seed.strip().lower()
    if s == "gamma":
        traj = _numeric(C.gamma_orbit, p, prm, budget)
        spec = C._gamma_spec(p, prm)
    elif s == "upsilon":
        traj = _numeric(C.upsilon_orbit, p, prm, budget)
        spec = C._upsilon_spec(p, prm)
    else:
        text = coords if s == "point" else (seed[len("point:"):] if s.startswith("point:")
                                           else seed)
        if text is None:
            raise click.BadParameter("point seed needs coordinates X,Z", param_hint="--seed")
        x, z = _parse_point(text)
        if (x < 0 < z) or (z < 0 < x):
            raise click.BadParameter("point must lie in the closed 1Q or 3Q",
                                     param_hint="--seed")
        section = F.m0_section(p, prm) if (m0_in_quadrant(p, prm) and x >= 0) else None
        spec = F.EventSpec(section=section)
        traj = _numeric(F.integrate, (x, z), p, prm, direction or "forward", budget.horizon,
                        spec, budget)
    fate = F.fate_of(traj, p, prm, spec)
    rows = [(t, x, z, r.value) for t, x, z, r in zip(traj.t, traj.X, traj.Z, traj.regions)]
    write_text(out, csv_text(["t", "X", "Z", "region"], rows)) if out else None
    ev = [{"kind": e.kind.value, "t": e.t, "X": e.point.X, "Z": e.point.Z, "detail": e.detail}
          for e in traj.events]
    if events_path is None and out:
        events_path = out + ".events.json"
    if events_path:
        write_text(events_path, to_json(ev) + "\n")
    summary = {"fate": str(fate), **fate.as_dict(), "status": traj.status,
               "n_samples": len(traj.t), "n_events": len(ev)}
    if not out:
        write_text(None, csv_text(["t", "X", "Z", "region"], rows))
        click.echo(to_json(summary), err=True)
    else:
        click.echo(to_json(summary))
    if fate.verdict is F.Verdict.UNDETERMINED:
        sys.exit(EXIT_NUMERIC)


@main.command("classify")
@param_options
@budget_options
@click.option("--p", type=float, required=True)
def cmd_classify(lam, Lam, op, N, a, horizon, atol, rtol, p):
    """Class of p among C, F, P, S with the evidence used."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    res = _numeric(C.classify_p, p, prm, _budget(horizon, rtol, atol))
    click.echo(to_json(res.as_dict()))


@main.command("critical")
@param_options
@budget_options
@click.option("--tol", type=float, default=1e-6, show_default=True)
def cmd_critical(lam, Lam, op, N, a, horizon, atol, rtol, tol):
    """Critical exponent p* by bisection on the fate of Gamma."""
    prm = _params(lam, Lam, op, N, a)
    if not tol > 0:
        raise click.UsageError("--tol must be positive")
    res = _numeric(C.critical_exponent, prm, tol, _budget(horizon, rtol, atol))
    click.echo(to_json(res.as_dict()))


def _sweep_one(job):
    prm, p, budget = job
    try:
        res = C.classify_p(p, prm, budget)
        detail = str(res.evidence)
        if res.wall_radius is not None:
            detail += f" R={fmt(res.wall_radius)}"
        if res.method != "numeric":
            detail += f" ({res.method})"
        return p, res.label.value, detail
    except NUMERIC_ERRORS as exc:
        return p, "Unresolved", type(exc).__name__


@main.command("sweep")
@param_options
@budget_options
@click.option("--p-from", "p_from", type=float, required=True)
@click.option("--p-to", "p_to", type=float, required=True)
@click.option("--steps", type=int, required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_sweep(lam, Lam, op, N, a, horizon, atol, rtol, p_from, p_to, steps, jobs, out):
    """Classify an evenly spaced grid of p; CSV p,class,detail in grid order."""
    prm = _params(lam, Lam, op, N, a)
    if steps < 1:
        raise click.UsageError("--steps must be at least 1")
    if jobs < 1:
        raise click.UsageError("--jobs must be at least 1")
    _check_p(min(p_from, p_to))
    grid = np.linspace(p_from, p_to, steps) if steps > 1 else np.array([p_from])
    budget = _budget(horizon, rtol, atol)
    work = [(prm, float(p), budget) for p in grid]
    if jobs == 1:
        rows = [_sweep_one(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, work))
    write_text(out, csv_text(["p", "class", "detail"], rows))
    if any(r[1] == "Unresolved" for r in rows):
        sys.exit(EXIT_NUMERIC)


@main.command("portrait")
@param_options
@click.option("--p", type=float, required=True)
@click.option("--grid", default="24x18", show_default=True, help="arrow grid WxH")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_portrait(lam, Lam, op, N, a, p, grid, out):
    """SVG phase portrait of the first quadrant."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    try:
        gw, gh = (int(v) for v in grid.lower().split("x"))
        if gw < 2 or gh < 2:
            raise ValueError
    except ValueError:
        raise click.BadParameter(f"expected WxH with W, H >= 2, got {grid!r}",
                                 param_hint="--grid")
    write_text(out, portrait_svg(p, prm, gw, gh))


@main.command("singular")
@param_options
@click.option("--p", type=float, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_singular(lam, Lam, op, N, a, p, out):
    """Catalog of singular radial solutions realised by computed orbits."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    cat = _numeric(C.singular_catalog, p, prm)
    write_text(out, to_json(cat.as_dict()) + "\n")


@main.command("shoot")
@param_options
@click.option("--p", type=float, required=True)
@click.option("--gamma", "gamma", type=float, default=1.0, show_default=True)
@click.option("--r-max", "r_max", type=float, default=1e150, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_shoot(lam, Lam, op, N, a, p, gamma, r_max, out):
    """Regular solution by shooting; CSV r,u,du,ddu and a summary on stderr."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    if not gamma > 0:
        raise click.UsageError("--gamma must be positive")
    sol = _numeric(R.shoot_regular, gamma, p, prm, r_max)
    rows = list(zip(sol.r, sol.u, sol.du, sol.ddu))
    if sol.wall_radius is not None and sol.wall_data is not None:
        rows.append(sol.wall_data)
    write_text(out, csv_text(["r", "u", "du", "ddu"], rows))
    summary = {"gamma": gamma, "p": p, "classification": sol.classification,
               "wall_radius": sol.wall_radius, "constants": sol.constants,
               "n_samples": len(rows)}
    click.echo(to_json(summary), err=out is None)
    if sol.at_infinity == "undetermined":
        sys.exit(EXIT_NUMERIC)


def _dulac_samples(p: float, prm, n: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    level = prm.concavity_level
    out = {}
    for name, zlo, zhi in (("R+", level, prm.n0_height * 2.0 + level), ("R-", 0.0, level)):
        xs = rng.uniform(0.0, prm.wall * 2.0, n)
        zs = rng.uniform(zlo, zhi, n)
        vals, wts = [], []
        for x, z in zip(xs, zs):
            if x <= 0 or z <= 0:
                continue
            try:
                vals.append(dulac_phi((x, z), p, prm))
            except OnInterface:
                continue
            wts.append(dulac_weight((x, z), p, prm))
        v = np.asarray(vals)
        # relative to the weight, which scales every term of the divergence
        tol = 1e-12 * np.maximum(np.asarray(wts), 1.0)
        if np.all(np.abs(v) <= tol):
            sign = "Φ=0"
        elif np.all(v > tol):
            sign = "Φ>0"
        elif np.all(v < -tol):
            sign = "Φ<0"
        else:
            sign = "mixed"
        out[name] = {"sign": sign, "n": int(len(v)), "min": float(v.min()),
                     "max": float(v.max())}
    return out


@main.command("dulac")
@param_options
@click.option("--p", type=float, required=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--polygon", default=None, help="closed polyline 'X,Z;X,Z;...' for the integral")
def cmd_dulac(lam, Lam, op, N, a, p, samples, seed, polygon):
    """Signs of the weighted divergence in R+ and R-, optional line integral."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    rep = _dulac_samples(p, prm, samples, seed)
    click.echo(f"{rep['R+']['sign']} in R+; {rep['R-']['sign']} in R\u2212")
    out = {"regions": rep}
    if polygon:
        try:
            pts = [_parse_point(s) for s in polygon.split(";") if s.strip()]
            if len(pts) < 3:
                raise ValueError("need at least three vertices")
            if pts[0] != pts[-1]:
                pts.append(pts[0])
            val = dulac_line_integral(pts, p, prm)
        except (ValueError, click.BadParameter) as exc:
            raise click.BadParameter(str(exc), param_hint="--polygon")
        out["line_integral"] = val
    click.echo(to_json(out))


@main.command("exterior")
@param_options
@click.option("--p", type=float, required=True)
@click.option("--p-star", "p_star", type=float, default=None,
              help="known critical exponent (computed if omitted)")
def cmd_exterior(lam, Lam, op, N, a, p, p_star):
    """Nonexistence check for exterior-domain radial solutions."""
    prm = _params(lam, Lam, op, N, a)
    _check_p(p)
    res = _numeric(C.exterior_nonexistence_check, p, prm, p_star)
    click.echo(res.verdict)
    click.echo(to_json(res.as_dict()))
    if res.verdict == "Inconclusive":
        sys.exit(EXIT_NUMERIC)


# -- SVG portrait --------------------------------------------------------------------

_GLYPH_FILL = {Kind.SINK: "#000", Kind.SOURCE: "#fff", Kind.SADDLE: "#c00",
               Kind.CENTER: "#06c", Kind.NON_HYPERBOLIC: "#999"}


def portrait_svg(p: float, prm, gw: int = 24, gh: int = 18, size: int = 640) -> str:
    """Self-contained SVG: field arrows, lines, stationary points, Gamma, Upsilon, cycles."""
    xmax = prm.wall * 1.25
    zmax = prm.n0_height * 1.15
    W, H = size, int(size * 0.75)
    pad = 30

    def sx(x):
        return pad + (W - 2 * pad) * x / xmax

    def sz(z):
        return H - pad - (H - 2 * pad) * z / zmax

    def num(v):
        return format(float(v), ".6g")

    def poly(xs, zs):
        keep = (np.asarray(xs) >= 0) & (np.asarray(xs) <= xmax) & \
               (np.asarray(zs) >= 0) & (np.asarray(zs) <= zmax)
        return " ".join(f"{num(sx(x))},{num(sz(z))}" for x, z, k in zip(xs, zs, keep) if k)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" '
           f'width="{W}" height="{H}">',
           '<defs><marker id="arrow" viewBox="0 0 6 6" refX="5" refY="3" markerWidth="4" '
           'markerHeight="4" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#888"/></marker>'
           '</defs>',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="#fff"/>',
           f'<g id="axes" stroke="#000"><line x1="{sx(0)}" y1="{sz(0)}" x2="{sx(xmax)}" '
           f'y2="{sz(0)}"/><line x1="{sx(0)}" y1="{sz(0)}" x2="{sx(0)}" y2="{sz(zmax)}"/></g>']
    # field arrows
    xs = (np.arange(gw) + 0.5) * xmax / gw
    zs = (np.arange(gh) + 0.5) * zmax / gh
    XX, ZZ = np.meshgrid(xs, zs)
    fx, fz = vector_field_array(XX, ZZ, p, prm)
    L = 0.4 * min((W - 2 * pad) / gw, (H - 2 * pad) / gh)
    out.append('<g id="field" stroke="#888" stroke-width="0.8">')
    for x, z, u, v in zip(XX.ravel(), ZZ.ravel(), fx.ravel(), fz.ravel()):
        # direction in screen units
        du, dv = u * (W - 2 * pad) / xmax, -v * (H - 2 * pad) / zmax
        nrm = math.hypot(du, dv)
        if not nrm > 0:
            continue
        x0, y0 = sx(x), sz(z)
        out.append(f'<line x1="{num(x0)}" y1="{num(y0)}" x2="{num(x0 + L * du / nrm)}" '
                   f'y2="{num(y0 + L * dv / nrm)}" marker-end="url(#arrow)"/>')
    out.append("</g>")
    ls = lines(p, prm)
    seg = [("concavity", (0.0, ls.concavity_level), (xmax, ls.concavity_level), "#080"),
           ("x-nullcline", *ls.x_nullcline, "#a0a"),
           ("z-nullcline-upper", *ls.z_nullcline_upper, "#0aa"),
           ("z-nullcline-lower", *ls.z_nullcline_lower, "#0aa"),
           ("wall", (ls.wall_line, 0.0), (ls.wall_line, zmax), "#c60")]
    out.append('<g id="lines" stroke-width="1.2" fill="none">')
    for name, a0, b0, col in seg:
        dash = ' stroke-dasharray="6,4"' if name == "wall" else ""
        out.append(f'<line class="{name}" x1="{num(sx(a0[0]))}" y1="{num(sz(a0[1]))}" '
                   f'x2="{num(sx(b0[0]))}" y2="{num(sz(b0[1]))}" stroke="{col}"{dash}/>')
    out.append("</g>")
    # orbits
    out.append('<g id="orbits" fill="none" stroke-width="1.6">')
    try:
        g = C.gamma_orbit(p, prm)
        out.append(f'<polyline class="gamma" stroke="#00c" points="{poly(g.X, g.Z)}"/>')
    except NUMERIC_ERRORS:
        pass
    try:
        u = C.upsilon_orbit(p, prm)
        out.append(f'<polyline class="upsilon" stroke="#c00" points="{poly(u.X, u.Z)}"/>')
    except NUMERIC_ERRORS:
        pass
    if m0_in_quadrant(p, prm):
        try:
            cycles = F.find_periodic_orbits(p, prm)
        except NUMERIC_ERRORS:
            cycles = []
        if classify_stationary(Label.M0, p, prm).classification is Kind.CENTER:
            # a few members of the center family at fractions of the box
            ext = F.section_extent(p, prm)
            for frac in (0.15, 0.35, 0.55, 0.75):
                try:
                    cycles.append(F.trace_cycle(frac * ext, p, prm))
                except NUMERIC_ERRORS:
                    pass
        for c in cycles[:8]:
            pts = c.points[:: max(1, len(c.points) // 400)]
            out.append(f'<polygon class="cycle" stroke="#070" '
                       f'points="{poly(pts[:, 0], pts[:, 1])}"/>')
    out.append("</g>")
    out.append('<g id="stationary" stroke="#000">')
    for sp in stationary_points(p, prm):
        if not sp.in_first_quadrant:
            continue
        x, z = sp.location.X, sp.location.Z
        fill = _GLYPH_FILL[sp.classification]
        out.append(f'<circle class="{sp.label.value} {sp.classification.value}" '
                   f'cx="{num(sx(x))}" cy="{num(sz(z))}" r="5" fill="{fill}"/>')
        out.append(f'<text x="{num(sx(x) + 7)}" y="{num(sz(z) - 7)}" font-size="12" '
                   f'stroke="none">{sp.label.value}</text>')
    out.append("</g>")
    out.append(f'<text x="{W - pad}" y="{pad - 10}" font-size="12" text-anchor="end">'
               f'{prm.operator.value} lambda={num(prm.lam)} Lambda={num(prm.Lam)} N={prm.N} '
               f'a={num(prm.a)} p={num(p)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    main()
