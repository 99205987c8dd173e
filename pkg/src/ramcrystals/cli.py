"""Command-line front end: instance I/O, polygon and invariant commands,
seeded property suites, and polygon rendering.

Subcommands::

    polygons      Newton/Hodge/filtration polygons, dominance, contact
    hasse         the partial Hasse invariants (perfect or artinian base)
    xord          build the split mu-ordinary model for a datum
    hn-split      Hodge-Newton factorization at a break contact
    mu-decompose  isoclinic decomposition of a mu-ordinary instance
    random-suite  seeded invariant suites over random instances
    render        ASCII or SVG plot of the polygons of an instance

Exit codes: 0 success; 2 parse/validation failure; 3 a property suite found
a counterexample; 4 precision exhausted after retries.  Every output artifact
starts with a versioned header echoing the seed and working precision.
Identical (input, seed, precision) produce identical bytes.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import __version__
from . import jsonio
from .artinian import BT1Crystal, total_general_hasse, validate_bt1
from .crystal import (
    PRDatum,
    derive_seed,
    exterior_datum,
    exterior_power,
    newton_oracle,
    pr_polygon,
    pr_polygon_tau,
    random_pr_crystal,
    validate_pr,
)
from .errors import (
    InvalidDatum,
    NoConvergence,
    PrecisionExhausted,
    RamCrystalsError,
)
from .hasse import contact_test, is_mu_ordinary, total_hasse
from .ordinary import (
    hodge_newton_split,
    mu_ordinary_decomposition,
    mu_ordinary_model,
    slope_break_data,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COUNTEREXAMPLE = 3
EXIT_PRECISION = 4


# ---------------------------------------------------------------------------
# shared formatting
# ---------------------------------------------------------------------------

def _seed_text(args):
    seed = getattr(args, "seed", None)
    return "none" if seed is None else str(seed)


def _header(args, precision):
    prec = "default" if precision is None else str(precision)
    return (
        f"ramcrystals {__version__}\n"
        f"input={getattr(args, 'input', None) or '-'} "
        f"seed={_seed_text(args)} precision={prec}\n"
    )


def _envelope(args, precision, payload):
    out = {
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "precision": precision,
    }
    out.update(payload)
    return jsonio.dumps(out)


def _poly_text(poly):
    if poly.width == 0:
        return "(width 0)"
    parts = [
        f"{s} x{m}" if m > 1 else f"{s}"
        for s, m in poly.slope_multiplicities()
    ]
    return "{" + ", ".join(parts) + "}"


def _ff_text(x):
    if x.is_zero():
        return "0"
    if len(x.coeffs) == 1:
        return str(x.coeffs[0])
    return "[" + ",".join(str(c) for c in x.coeffs) + "]"


def _ff_json(x):
    return [int(c) for c in x.coeffs]


def _artin_text(v):
    if v.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(v.coeffs):
        if c.is_zero():
            continue
        parts.append(_ff_text(c) if k == 0 else f"{_ff_text(c)}*b{k}")
    return " + ".join(parts)


def _artin_json(v):
    return [_ff_json(c) for c in v.coeffs]


def _fraction_json(x):
    x = Fraction(x)
    return [str(x.numerator), str(x.denominator)]


# ---------------------------------------------------------------------------
# input plumbing
# ---------------------------------------------------------------------------

def _read_instance(args, need_fil=False, need_mu=False, need_ring=False):
    if not args.input:
        raise InvalidDatum("this command needs --input FILE")
    obj = jsonio.read_path(args.input)
    c, fil, mu, ring = jsonio.instance_from_json(
        obj, precision=getattr(args, "precision", None)
    )
    if need_fil and fil is None:
        raise InvalidDatum("the instance file carries no 'fil' block")
    if need_mu and mu is None:
        raise InvalidDatum("the instance file carries no 'mu' block")
    if need_ring and ring is None:
        raise InvalidDatum("the instance file carries no 'ring' block")
    return c, fil, mu, ring


def _read_datum_request(args):
    """A datum for instance generation: either a light request object
    {"p", "h", "e", "mu": {"tau_0": [...]}, optional "n"/"precision"/
    "eisenstein"} or a full instance file whose datum and mu are reused."""
    if not args.input:
        return dict(mu=PRDatum(2, [[2, 1], [1, 0]], e=2), p=3, n=None,
                    eisenstein=None, precision=getattr(args, "precision", None))
    obj = jsonio.read_path(args.input)
    if "Y" in obj:
        c, _fil, mu, _ring = jsonio.instance_from_json(obj)
        if mu is None:
            raise InvalidDatum("the instance file carries no 'mu' block")
        field = c.field
        eis = [list(field.base.witt(x).coords_int())
               for x in field.eisenstein_raw]
        return dict(
            mu=mu, p=field.base.p, n=field.base.n, eisenstein=eis,
            precision=getattr(args, "precision", None) or field.base.N,
        )
    what = "datum request"
    p = jsonio._int_in(jsonio._get(obj, "p", what), "p")
    h = jsonio._int_in(jsonio._get(obj, "h", what), "h")
    e = jsonio._int_in(jsonio._get(obj, "e", what), "e")
    mu_obj = jsonio._get(obj, "mu", what)
    if not isinstance(mu_obj, dict) or not mu_obj:
        raise InvalidDatum("mu: expected an object keyed tau_0..")
    f = len(mu_obj)
    rows = [
        jsonio._int_list_in(jsonio._get(mu_obj, f"tau_{t}", "mu"), "mu row")
        for t in range(f)
    ]
    mu = PRDatum(h, rows, e=e)
    n = obj.get("n")
    if n is not None:
        n = jsonio._int_in(n, "n")
    eis = obj.get("eisenstein")
    if eis is not None:
        eis = [jsonio._int_list_in(cv, "eisenstein coefficient") for cv in eis]
    precision = getattr(args, "precision", None)
    if precision is None and "precision" in obj:
        precision = jsonio._int_in(obj["precision"], "precision")
    return dict(mu=mu, p=p, n=n, eisenstein=eis, precision=precision)


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------

def _instance_polygons(c, mu):
    newt = c.newton_polygon()
    hdg_taus = [c.hodge_polygon_tau(t) for t in range(c.field.f)]
    hdg = c.hodge_polygon()
    pr = pr_polygon(mu) if mu is not None else None
    return newt, hdg_taus, hdg, pr


def cmd_polygons(args):
    c, _fil, mu, _ring = _read_instance(args)
    newt, hdg_taus, hdg, pr = _instance_polygons(c, mu)
    verdicts = {
        "newton_dominates_hodge": newt.dominates(hdg),
        "endpoints_equal": newt.eval(c.h) == hdg.eval(c.h),
    }
    contacts = {"newton_hodge": newt.contact_abscissas(hdg)}
    if pr is not None:
        verdicts["hodge_dominates_pr"] = hdg.dominates(pr)
        verdicts["endpoints_equal"] = verdicts["endpoints_equal"] and (
            hdg.eval(c.h) == pr.eval(c.h)
        )
        contacts["newton_pr"] = newt.contact_abscissas(pr)
        verdicts["mu_ordinary"] = newt == pr
    prec = c.field.base.N

    if args.format == "json":
        payload = {
            "command": "polygons",
            "h": c.h,
            "newton": jsonio.polygon_to_json(newt),
            "hodge_mean": jsonio.polygon_to_json(hdg),
            "hodge_per_tau": [jsonio.polygon_to_json(P) for P in hdg_taus],
            "contacts": contacts,
            "verdicts": verdicts,
        }
        if pr is not None:
            payload["pr"] = jsonio.polygon_to_json(pr)
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    lines.append(f"h={c.h} p={c.field.base.p} n={c.field.base.n} "
                 f"f={c.field.f} e={c.field.e}")
    lines.append(f"Newton:     {_poly_text(newt)}")
    lines.append(f"Hodge mean: {_poly_text(hdg)}")
    for t, P in enumerate(hdg_taus):
        lines.append(f"Hodge tau_{t}: {_poly_text(P)}")
    if pr is not None:
        lines.append(f"PR:         {_poly_text(pr)}")
    for name, v in verdicts.items():
        lines.append(f"{name}: {str(v).lower()}")
    for name, v in contacts.items():
        lines.append(f"contact {name}: {v}")
    return "\n".join(lines) + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# hasse
# ---------------------------------------------------------------------------

def _hasse_perfect(args, c, fil, mu):
    report = validate_pr(c, fil, mu)
    if not report.ok:
        raise InvalidDatum(f"instance fails validation: {report.failures}")
    hr = total_hasse(c, fil, mu)
    newt, _hdg_taus, hdg, pr = _instance_polygons(c, mu)
    prec = c.field.base.N

    if args.format == "json":
        payload = {
            "command": "hasse",
            "base": "perfect",
            "levels": [
                {
                    "tau": lv.tau,
                    "i": lv.i,
                    "dim": lv.d,
                    "exponent": lv.exponents.get("total", 0),
                    "scalar": _ff_json(lv.scalar),
                    "nonzero": bool(lv.scalar),
                }
                for lv in hr.levels
            ],
            "total_scalar": _ff_json(hr.total),
            "total_nonzero": hr.nonzero,
            "mu_ordinary": newt == pr,
            "newton": jsonio.polygon_to_json(newt),
            "hodge_mean": jsonio.polygon_to_json(hdg),
            "pr": jsonio.polygon_to_json(pr),
        }
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    lines.append("tau  i  dim  exponent  scalar  nonzero")
    for lv in hr.levels:
        lines.append(
            f"{lv.tau:>3}  {lv.i:<2} {lv.d:>3}  {lv.exponents.get('total', 0):>8}"
            f"  {_ff_text(lv.scalar):>6}  {str(bool(lv.scalar)).lower()}"
        )
    lines.append(f"total: {_ff_text(hr.total)} "
                 f"(nonzero: {str(hr.nonzero).lower()})")
    lines.append(f"Newton:     {_poly_text(newt)}")
    lines.append(f"Hodge mean: {_poly_text(hdg)}")
    lines.append(f"PR:         {_poly_text(pr)}")
    lines.append(f"mu_ordinary: {str(newt == pr).lower()}")
    return "\n".join(lines) + "\n", EXIT_OK


def _hasse_artinian(args, c, fil, mu, ring):
    b = BT1Crystal.from_crystal(c, fil, mu, ring=ring)
    report = validate_bt1(b)
    if not report.ok:
        raise InvalidDatum(
            f"mod-p instance fails validation: {report.failures()}"
        )
    gh = total_general_hasse(b, mu)
    prec = c.field.base.N

    if args.format == "json":
        payload = {
            "command": "hasse",
            "base": "artinian",
            "ring_dim": ring.dim,
            "levels": [
                {
                    "tau": lv.tau,
                    "i": lv.i,
                    "dim": lv.dim,
                    "value": _artin_json(lv.value),
                    "unit": lv.unit,
                }
                for lv in gh.levels
            ],
            "total_value": _artin_json(gh.total),
            "total_unit": gh.total_unit,
        }
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    lines.append(f"coefficient ring: dimension {ring.dim}, "
                 f"nilpotency {ring.nilpotency}")
    lines.append("tau  i  dim  value  unit")
    for lv in gh.levels:
        lines.append(
            f"{lv.tau:>3}  {lv.i:<2} {lv.dim:>3}  {_artin_text(lv.value)}"
            f"  {str(lv.unit).lower()}"
        )
    lines.append(f"total: {_artin_text(gh.total)} "
                 f"(unit: {str(gh.total_unit).lower()})")
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_hasse(args):
    need_ring = args.base == "artinian"
    c, fil, mu, ring = _read_instance(
        args, need_fil=True, need_mu=True, need_ring=need_ring
    )
    if need_ring:
        return _hasse_artinian(args, c, fil, mu, ring)
    return _hasse_perfect(args, c, fil, mu)


# ---------------------------------------------------------------------------
# xord
# ---------------------------------------------------------------------------

def cmd_xord(args):
    req = _read_datum_request(args)
    c, fil, mu = mu_ordinary_model(
        req["mu"], p=req["p"], n=req["n"], eisenstein=req["eisenstein"],
        precision=req["precision"],
    )
    newt, _hdg_taus, hdg, pr = _instance_polygons(c, mu)
    hr = total_hasse(c, fil, mu)
    prec = c.field.base.N

    if args.format == "json":
        payload = {
            "command": "xord",
            "ordered_mu": {f"tau_{t}": list(r) for t, r in enumerate(mu.rows)},
            "newton": jsonio.polygon_to_json(newt),
            "hodge_mean": jsonio.polygon_to_json(hdg),
            "pr": jsonio.polygon_to_json(pr),
            "polygons_equal": newt == hdg == pr,
            "total_nonzero": hr.nonzero,
            "instance": jsonio.instance_to_json(c, fil, mu),
        }
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    lines.append(f"ordered datum: {list(list(r) for r in mu.rows)} "
                 f"(h={mu.h}, e={mu.e}, f={mu.f})")
    lines.append(f"Newton:     {_poly_text(newt)}")
    lines.append(f"Hodge mean: {_poly_text(hdg)}")
    lines.append(f"PR:         {_poly_text(pr)}")
    lines.append(f"polygons equal: {str(newt == hdg == pr).lower()}")
    lines.append(f"total Hasse nonzero: {str(hr.nonzero).lower()}")
    return "\n".join(lines) + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# hn-split
# ---------------------------------------------------------------------------

def cmd_hn_split(args):
    if args.at is None:
        raise InvalidDatum("hn-split needs --at BREAK_ABSCISSA")
    c, fil, mu, _ring = _read_instance(args)
    split = hodge_newton_split(c, args.at)
    parts = [("sub", split.sub, split.sub_cols),
             ("complement", split.complement, split.comp_cols)]
    prec = c.field.base.N

    if args.format == "json":
        payload = {"command": "hn-split", "at": args.at}
        for name, part, cols in parts:
            payload[name] = {
                "rank": part.h,
                "newton": jsonio.polygon_to_json(part.newton_polygon()),
                "embedding": {
                    f"tau_{t}": jsonio._matrix_out(g) for t, g in enumerate(cols)
                },
                "instance": jsonio.instance_to_json(part),
            }
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    lines.append(f"split at abscissa {args.at} "
                 f"(total rank {c.h})")
    for name, part, cols in parts:
        lines.append(
            f"{name}: rank {part.h}, "
            f"Newton {_poly_text(part.newton_polygon())}"
        )
    return "\n".join(lines) + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# mu-decompose
# ---------------------------------------------------------------------------

def cmd_mu_decompose(args):
    c, _fil, mu, _ring = _read_instance(args, need_mu=True)
    blocks = mu_ordinary_decomposition(c, mu)
    ef = c.field.e * c.field.f
    prec = c.field.base.N

    if args.format == "json":
        payload = {
            "command": "mu-decompose",
            "blocks": [
                {
                    "rank": rank,
                    "pi_exponents": list(alpha),
                    "slope": _fraction_json(Fraction(sum(alpha), ef)),
                }
                for rank, alpha in blocks
            ],
        }
        return _envelope(args, prec, payload), EXIT_OK

    lines = [_header(args, prec).rstrip("\n")]
    for j, (rank, alpha) in enumerate(blocks):
        lines.append(
            f"block {j}: rank {rank}, pi-exponents {list(alpha)}, "
            f"slope {Fraction(sum(alpha), ef)}"
        )
    return "\n".join(lines) + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# random-suite
# ---------------------------------------------------------------------------

_SUITE_CHECKS = (
    "pr-valid",
    "mazur-newton-dominates-hodge",
    "mazur-hodge-dominates-pr",
    "endpoints-equal",
    "oracle-agrees",
    "exterior-compatibility",
    "contact-iff-nonzero",
    "total-iff-mu-ordinary",
)


def _suite_one_trial(c, fil, mu):
    """Each check's verdict (True/False) or None when not applicable."""
    out = {}
    out["pr-valid"] = validate_pr(c, fil, mu).ok
    newt, _hdg_taus, hdg, pr = _instance_polygons(c, mu)
    out["mazur-newton-dominates-hodge"] = newt.dominates(hdg)
    out["mazur-hodge-dominates-pr"] = hdg.dominates(pr)
    h = c.h
    out["endpoints-equal"] = (
        newt.eval(h) == hdg.eval(h) == pr.eval(h)
    )
    try:
        out["oracle-agrees"] = newton_oracle(c) == newt
    except NoConvergence:
        out["oracle-agrees"] = None
    ok = True
    for s in range(1, h + 1):
        cs, fils = exterior_power(c, fil, s)
        ds = exterior_datum(mu, s)
        ok = ok and cs.newton_polygon().eval(1) == newt.eval(s)
        ok = ok and all(
            cs.hodge_polygon_tau(t).eval(1) == c.hodge_polygon_tau(t).eval(s)
            for t in range(c.field.f)
        )
        ok = ok and pr_polygon_tau(ds, 0).eval(1) == pr_polygon_tau(mu, 0).eval(s)
        del fils
    out["exterior-compatibility"] = ok
    hr = total_hasse(c, fil, mu)
    agree = True
    tested = False
    for lv in hr.levels:
        if 0 < lv.d < h:
            tested = True
            agree = agree and (
                bool(lv.scalar) == contact_test(c, mu, lv.tau, lv.i)
            )
    out["contact-iff-nonzero"] = agree if tested else None
    out["total-iff-mu-ordinary"] = hr.nonzero == is_mu_ordinary(c, mu)
    return out


def cmd_random_suite(args):
    req = _read_datum_request(args)
    mu = req["mu"]
    counts = {name: {"pass": 0, "fail": 0, "skip": 0} for name in _SUITE_CHECKS}
    first = None
    for trial in range(args.trials):
        child = derive_seed(args.seed, trial)
        c, fil = random_pr_crystal(
            mu, child, p=req["p"], n=req["n"],
            eisenstein=req["eisenstein"], precision=req["precision"],
        )
        verdicts = _suite_one_trial(c, fil, mu)
        for name in _SUITE_CHECKS:
            v = verdicts[name]
            if v is None:
                counts[name]["skip"] += 1
            elif v:
                counts[name]["pass"] += 1
            else:
                counts[name]["fail"] += 1
                if first is None:
                    first = {
                        "trial": trial,
                        "check": name,
                        "instance": jsonio.instance_to_json(c, fil, mu),
                    }
    code = EXIT_OK if first is None else EXIT_COUNTEREXAMPLE
    prec = req["precision"]

    if args.format == "json":
        payload = {
            "command": "random-suite",
            "trials": args.trials,
            "mu": {f"tau_{t}": list(r) for t, r in enumerate(mu.rows)},
            "p": req["p"],
            "counts": counts,
            "counterexample": first,
            "ok": first is None,
        }
        return _envelope(args, prec, payload), code

    lines = [_header(args, prec).rstrip("\n")]
    lines.append(f"datum: {list(list(r) for r in mu.rows)} "
                 f"(h={mu.h}, e={mu.e}, f={mu.f}, p={req['p']})")
    lines.append(f"trials: {args.trials}")
    for name in _SUITE_CHECKS:
        cnt = counts[name]
        extra = f" skip={cnt['skip']}" if cnt["skip"] else ""
        lines.append(f"{name}: pass={cnt['pass']} fail={cnt['fail']}{extra}")
    if first is None:
        lines.append("result: all checks passed")
    else:
        lines.append(
            f"result: counterexample at trial {first['trial']} "
            f"({first['check']})"
        )
        lines.append(jsonio.dumps(first["instance"]).rstrip("\n"))
    return "\n".join(lines) + "\n", code


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

def _gather_polygons(args):
    if not args.input:
        raise InvalidDatum("render needs --input FILE")
    obj = jsonio.read_path(args.input)
    if isinstance(obj, dict) and "slopes" in obj:
        return [("P", jsonio.polygon_from_json(obj))], None
    c, _fil, mu, _ring = jsonio.instance_from_json(
        obj, precision=getattr(args, "precision", None)
    )
    newt, _hdg_taus, hdg, pr = _instance_polygons(c, mu)
    polys = [("Newt", newt), ("Hdg", hdg)]
    if pr is not None:
        polys.append(("PR", pr))
    return polys, c.field.base.N


def _vertex_labels(name, poly):
    pts = ", ".join(f"({i}, {v})" for i, v in poly.vertices())
    return f"{name} vertices: {pts}"


def _render_ascii(polys):
    width = polys[0][1].width
    lines = []
    if width == 0:
        lines.append("(empty plot: width 0)")
        for name, poly in polys:
            lines.append(_vertex_labels(name, poly))
        return lines
    max_y = max(poly.eval(width) for _name, poly in polys)
    sub = 4  # plotted columns per unit abscissa
    cols = width * sub + 1
    rows = 17 if max_y > 0 else 1
    grid = [[" "] * cols for _ in range(rows)]

    def to_row(y):
        if max_y == 0:
            return 0
        return round((rows - 1) * Fraction(y) / max_y)

    marks = "NHPQRS"
    for idx, (name, poly) in enumerate(polys):
        mark = marks[idx % len(marks)]
        vals = poly.values()
        for k in range(cols):
            x = Fraction(k, sub)
            j = min(int(x), width - 1)
            y = vals[j] + poly.slopes[j] * (x - j)
            r = rows - 1 - to_row(y)
            if grid[r][k] == " ":
                grid[r][k] = mark
            elif grid[r][k] != mark:
                grid[r][k] = "*"
        for i, v in poly.vertices():
            grid[rows - 1 - to_row(v)][i * sub] = "o"

    for r, row in enumerate(grid):
        label = ""
        if r == 0 and max_y > 0:
            label = f" y={max_y}"
        elif r == rows - 1:
            label = " y=0"
        lines.append("".join(row).rstrip() + label)
    lines.append("^" + "-" * (cols - 2) + "^" if cols > 1 else "^")
    lines.append(f"x=0 .. x={width}")
    legend = ", ".join(
        f"{marks[i % len(marks)]}={name}" for i, (name, _p) in enumerate(polys)
    )
    lines.append(f"legend: {legend} (o = breakpoint, * = overlap)")
    for name, poly in polys:
        lines.append(_vertex_labels(name, poly))
    return lines


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _render_svg(polys, header_comment):
    width = polys[0][1].width
    w_px, h_px, margin = 480, 360, 48
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w_px}" height="{h_px}" '
        f'viewBox="0 0 {w_px} {h_px}">',
        f"<!-- {header_comment} -->",
        f'<rect x="0" y="0" width="{w_px}" height="{h_px}" fill="white"/>',
    ]
    max_y = max(
        (poly.eval(width) for _name, poly in polys), default=Fraction(0)
    ) if width > 0 else Fraction(0)

    def px(x, y):
        fx = margin + (float(x) / width) * (w_px - 2 * margin) if width else margin
        fy = (
            h_px - margin - (float(y) / float(max_y)) * (h_px - 2 * margin)
            if max_y > 0
            else h_px - margin
        )
        return f"{fx:.2f},{fy:.2f}"

    # axes
    out.append(
        f'<polyline points="{px(0, max_y)} {px(0, 0)} '
        f'{px(width if width else 1, 0)}" '
        f'fill="none" stroke="#888888" stroke-width="1"/>'
    )
    if width == 0:
        out.append(
            f'<text x="{margin}" y="{margin}" font-size="12">'
            f"empty plot: width 0</text>"
        )
    for idx, (name, poly) in enumerate(polys):
        color = _SVG_COLORS[idx % len(_SVG_COLORS)]
        if width > 0:
            pts = " ".join(px(i, v) for i, v in enumerate(poly.values()))
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="2"/>'
            )
        for i, v in poly.vertices():
            cx, cy = px(i, v).split(",")
            out.append(
                f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>'
            )
            out.append(
                f'<text x="{float(cx) + 5:.2f}" y="{float(cy) - 5:.2f}" '
                f'font-size="10" fill="{color}">({i}, {v})</text>'
            )
        out.append(
            f'<text x="{margin}" y="{16 + 14 * idx}" font-size="12" '
            f'fill="{color}">{name}</text>'
        )
    out.append("</svg>")
    return out


def cmd_render(args):
    polys, prec = _gather_polygons(args)
    widths = {poly.width for _name, poly in polys}
    if len(widths) != 1:
        raise InvalidDatum(f"cannot overlay polygons of widths {sorted(widths)}")
    if args.format == "svg":
        comment = (
            f"ramcrystals {__version__} input={args.input or '-'} "
            f"seed={_seed_text(args)} "
            f"precision={'default' if prec is None else prec}"
        )
        return "\n".join(_render_svg(polys, comment)) + "\n", EXIT_OK
    lines = [_header(args, prec).rstrip("\n")]
    lines.extend(_render_ascii(polys))
    return "\n".join(lines) + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _parser():
    top = argparse.ArgumentParser(
        prog="ramcrystals",
        description="Exact polygons and mu-ordinary Hasse invariants of "
        "F-crystals with ramified endomorphism structure.",
    )
    top.add_argument("--version", action="version",
                     version=f"ramcrystals {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, fmt_choices=("table", "json"), fmt_default="table"):
        p.add_argument("--input", help="input JSON file")
        p.add_argument("--precision", type=int,
                       help="override the working p-adic precision")
        p.add_argument("--format", choices=fmt_choices, default=fmt_default,
                       help=f"output format (default: {fmt_default})")

    p = sub.add_parser("polygons", help="Newton/Hodge/filtration polygons")
    common(p)
    p.set_defaults(func=cmd_polygons)

    p = sub.add_parser("hasse", help="partial Hasse invariants")
    common(p)
    p.add_argument("--base", choices=("perfect", "artinian"),
                   default="perfect",
                   help="coefficient base (artinian reads the file's ring)")
    p.set_defaults(func=cmd_hasse)

    p = sub.add_parser("xord", help="build the split mu-ordinary model")
    common(p)
    p.set_defaults(func=cmd_xord)

    p = sub.add_parser("hn-split", help="Hodge-Newton factorization")
    common(p)
    p.add_argument("--at", type=int, required=True,
                   help="interior break abscissa to split at")
    p.set_defaults(func=cmd_hn_split)

    p = sub.add_parser("mu-decompose", help="isoclinic decomposition")
    common(p)
    p.set_defaults(func=cmd_mu_decompose)

    p = sub.add_parser("random-suite", help="seeded invariant property suite")
    common(p)
    p.add_argument("--seed", type=int, required=True,
                   help="explicit base seed (required for reproducibility)")
    p.add_argument("--trials", type=int, default=100,
                   help="number of generated instances (default: 100)")
    p.set_defaults(func=cmd_random_suite)

    p = sub.add_parser("render", help="plot polygons")
    common(p, fmt_choices=("ascii", "svg"), fmt_default="ascii")
    p.set_defaults(func=cmd_render)

    return top


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        text, code = args.func(args)
    except (PrecisionExhausted, NoConvergence) as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except RamCrystalsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
