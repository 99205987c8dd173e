"""JSON round-tripping for field data, crystals, flags, polygons, and rings.

Layouts:

* field datum   -- ``{"p", "f", "e", "eisenstein": [[int, ...], ...], "n",
  "field_modulus": [int, ...], "precision"}``; a base-field datum is the
  same object without the ramification keys.
* polygon       -- ``{"width": h, "slopes": [["num", "den"], ...]}`` with the
  slope components always decimal strings (they are exact rationals).
* instance      -- ``{"datum", "base", "h", "Y": {"tau_0": [[elem, ...], ...]},
  "fil": {"tau_0": [mat_0, ..., mat_e]}, "mu": {"tau_0": [d_1, ..., d_e]}}``
  where ``elem`` is the e x n integer matrix of an element's canonical
  residues (pi-power rows, omega-power columns); ``fil``/``mu`` optional.
* artinian instance -- the instance layout plus ``{"ring": {"basis": [...],
  "mul_table": [[[coeff, ...], ...], ...]}}`` with ``coeff`` the n residue
  coordinates of a structure constant.

Integer leaves are emitted as plain JSON numbers while they fit the exact
IEEE-754 window and as decimal strings beyond 2^53 - 1, so files survive
JavaScript-style readers; the parser accepts both forms everywhere.
Serialization is canonical (sorted keys, two-space indent, trailing
newline): parse-then-serialize is the identity on anything serialize
produced.
"""

from __future__ import annotations

import json

from .artinian import ArtinAlgebra
from .crystal import Crystal, PRDatum, PRFiltration
from .errors import InvalidDatum
from .linalg import RamMatrix
from .polygon import Polygon
from .ramified import LocalField
from .witt import BaseField

from fractions import Fraction

_SAFE = 2**53 - 1


# ---------------------------------------------------------------------------
# integer leaves
# ---------------------------------------------------------------------------

def _int_out(x):
    return x if -_SAFE <= x <= _SAFE else str(x)


def _int_in(v, what):
    if isinstance(v, bool):
        raise InvalidDatum(f"{what}: expected an integer, got a boolean")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v, 10)
        except ValueError:
            raise InvalidDatum(f"{what}: not a decimal integer: {v!r}") from None
    raise InvalidDatum(f"{what}: expected an integer, got {type(v).__name__}")


def _int_list_in(v, what):
    if not isinstance(v, list):
        raise InvalidDatum(f"{what}: expected a list")
    return [_int_in(x, what) for x in v]


def _get(obj, key, what):
    if not isinstance(obj, dict):
        raise InvalidDatum(f"{what}: expected a JSON object")
    if key not in obj:
        raise InvalidDatum(f"{what}: missing key {key!r}")
    return obj[key]


# ---------------------------------------------------------------------------
# field data
# ---------------------------------------------------------------------------

def base_field_to_json(base):
    return {
        "p": base.p,
        "n": base.n,
        "field_modulus": [_int_out(x) for x in base.field_modulus],
        "precision": base.N,
    }


def base_field_from_json(obj):
    what = "base field datum"
    return BaseField(
        _int_in(_get(obj, "p", what), "p"),
        _int_in(_get(obj, "n", what), "n"),
        _int_in(_get(obj, "precision", what), "precision"),
        tuple(_int_list_in(_get(obj, "field_modulus", what), "field_modulus")),
    )


def local_field_to_json(field):
    base = field.base
    # the Eisenstein coefficients define the ring and are therefore emitted
    # exactly as stored, never reduced modulo p^precision
    eis = [
        [c] + [0] * (base.n - 1) if isinstance(c, int) else list(c)
        for c in field.eisenstein_raw
    ]
    out = base_field_to_json(base)
    out.update(
        {
            "f": field.f,
            "e": field.e,
            "eisenstein": [[_int_out(x) for x in c] for c in eis],
        }
    )
    return out


def local_field_from_json(obj, base=None):
    what = "field datum"
    if base is None:
        base = base_field_from_json(obj)
    eis_raw = _get(obj, "eisenstein", what)
    if not isinstance(eis_raw, list):
        raise InvalidDatum("eisenstein: expected a list of coefficient vectors")
    eis = [_int_list_in(c, "eisenstein coefficient") for c in eis_raw]
    return LocalField(
        base,
        _int_in(_get(obj, "f", what), "f"),
        _int_in(_get(obj, "e", what), "e"),
        eis,
    )


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------

def polygon_to_json(poly):
    return {
        "width": poly.width,
        "slopes": [[str(s.numerator), str(s.denominator)] for s in poly.slopes],
    }


def polygon_from_json(obj):
    what = "polygon"
    width = _int_in(_get(obj, "width", what), "width")
    raw = _get(obj, "slopes", what)
    if not isinstance(raw, list):
        raise InvalidDatum("slopes: expected a list")
    slopes = []
    for pair in raw:
        if not isinstance(pair, list) or len(pair) != 2:
            raise InvalidDatum("slopes: each entry must be a [num, den] pair")
        num = _int_in(pair[0], "slope numerator")
        den = _int_in(pair[1], "slope denominator")
        if den == 0:
            raise InvalidDatum("slopes: zero denominator")
        slopes.append(Fraction(num, den))
    if len(slopes) != width:
        raise InvalidDatum(
            f"polygon: width {width} but {len(slopes)} slopes listed"
        )
    return Polygon(slopes)


# ---------------------------------------------------------------------------
# elements and matrices
# ---------------------------------------------------------------------------

def _elem_out(x):
    return [[_int_out(c) for c in row] for row in x.coords_int()]


def _elem_in(field, tau, rows, what):
    if not isinstance(rows, list) or len(rows) != field.e:
        raise InvalidDatum(f"{what}: element needs {field.e} coordinate rows")
    coords = []
    for row in rows:
        row = _int_list_in(row, what)
        if len(row) != field.base.n:
            raise InvalidDatum(
                f"{what}: coordinate row needs {field.base.n} entries"
            )
        coords.append(tuple(row))
    return field.elem(coords, tau)


def _matrix_out(m):
    return [[_elem_out(x) for x in row] for row in m.rows]


def _matrix_in(field, tau, rows, what, shape=None):
    if not isinstance(rows, list) or not rows:
        raise InvalidDatum(f"{what}: expected a non-empty matrix")
    built = []
    for row in rows:
        if not isinstance(row, list) or len(row) != len(rows[0]):
            raise InvalidDatum(f"{what}: ragged matrix")
        built.append([_elem_in(field, tau, x, what) for x in row])
    if shape is not None and (len(built), len(built[0])) != shape:
        raise InvalidDatum(
            f"{what}: expected a {shape[0]} x {shape[1]} matrix"
        )
    return RamMatrix(field, tau, built)


def _tau_key(t):
    return f"tau_{t}"


def _tau_table(obj, f, what):
    if not isinstance(obj, dict):
        raise InvalidDatum(f"{what}: expected an object keyed tau_0..tau_{f - 1}")
    out = []
    for t in range(f):
        key = _tau_key(t)
        if key not in obj:
            raise InvalidDatum(f"{what}: missing key {key!r}")
        out.append(obj[key])
    extra = set(obj) - {_tau_key(t) for t in range(f)}
    if extra:
        raise InvalidDatum(f"{what}: unexpected keys {sorted(extra)}")
    return out


# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------

def ring_to_json(ring):
    return {
        "basis": [f"b{i}" for i in range(ring.dim)],
        "mul_table": [
            [[[_int_out(c) for c in ent.coeffs] for ent in row] for row in line]
            for line in ring.mul_table
        ],
    }


def ring_from_json(obj, base):
    what = "coefficient ring"
    table_raw = _get(obj, "mul_table", what)
    if not isinstance(table_raw, list):
        raise InvalidDatum("mul_table: expected a list")
    basis = obj.get("basis")
    if basis is not None and (
        not isinstance(basis, list) or len(basis) != len(table_raw)
    ):
        raise InvalidDatum("basis: label list does not match the table size")
    table = []
    for line in table_raw:
        if not isinstance(line, list):
            raise InvalidDatum("mul_table: expected nested lists")
        row_out = []
        for row in line:
            if not isinstance(row, list):
                raise InvalidDatum("mul_table: expected nested lists")
            row_out.append(
                [base.ff(tuple(_int_list_in(ent, "structure constant")))
                 for ent in row]
            )
        table.append(row_out)
    return ArtinAlgebra(base, table)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def instance_to_json(c, fil=None, mu=None, ring=None):
    field = c.field
    out = {
        "datum": local_field_to_json(field),
        "base": base_field_to_json(field.base),
        "h": c.h,
        "Y": {_tau_key(t): _matrix_out(c.Y[t]) for t in range(field.f)},
    }
    if fil is not None:
        out["fil"] = {
            _tau_key(t): [_matrix_out(g) for g in fil.levels[t]]
            for t in range(field.f)
        }
    if mu is not None:
        out["mu"] = {_tau_key(t): list(mu.rows[t]) for t in range(field.f)}
    if ring is not None:
        out["ring"] = ring_to_json(ring)
    return out


def instance_from_json(obj, precision=None):
    """Rebuild ``(crystal, fil, mu, ring)`` from an instance object.

    ``fil``, ``mu`` and ``ring`` come back as None when absent.  Pass
    ``precision`` to re-read the instance at another p-adic precision (the
    stored coordinates are canonical residues, so relifting is exact).
    """
    what = "instance"
    base = base_field_from_json(_get(obj, "base", what))
    datum = _get(obj, "datum", what)
    for key in ("p", "n", "precision"):
        if _int_in(_get(datum, key, "field datum"), key) != getattr(
            base, {"p": "p", "n": "n", "precision": "N"}[key]
        ):
            raise InvalidDatum(f"datum/base disagree on {key!r}")
    if tuple(_int_list_in(_get(datum, "field_modulus", what), "field_modulus")) != tuple(
        base.field_modulus
    ):
        raise InvalidDatum("datum/base disagree on 'field_modulus'")
    if precision is not None:
        base = BaseField(base.p, base.n, precision, base.field_modulus)
    field = local_field_from_json(datum, base)
    h = _int_in(_get(obj, "h", what), "h")
    if h < 1:
        raise InvalidDatum("h must be >= 1")

    y_table = _tau_table(_get(obj, "Y", what), field.f, "Y")
    c = Crystal(
        field,
        [_matrix_in(field, t, y_table[t], f"Y tau_{t}", (h, h))
         for t in range(field.f)],
    )

    fil = None
    if "fil" in obj:
        fil_table = _tau_table(obj["fil"], field.f, "fil")
        levels = []
        for t in range(field.f):
            ls = fil_table[t]
            if not isinstance(ls, list) or len(ls) != field.e + 1:
                raise InvalidDatum(
                    f"fil tau_{t}: needs {field.e + 1} level matrices"
                )
            levels.append(
                [_matrix_in(field, t, g, f"fil tau_{t} level {i}", (h, h))
                 for i, g in enumerate(ls)]
            )
        fil = PRFiltration(field, levels)

    mu = None
    if "mu" in obj:
        mu_table = _tau_table(obj["mu"], field.f, "mu")
        rows = [_int_list_in(row, "mu row") for row in mu_table]
        mu = PRDatum(h, rows, e=field.e)

    ring = None
    if "ring" in obj:
        ring = ring_from_json(obj["ring"], field.base)

    return c, fil, mu, ring


# ---------------------------------------------------------------------------
# canonical text form
# ---------------------------------------------------------------------------

def dumps(obj):
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDatum(
            f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None


def read_path(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return loads(handle.read())
    except OSError as exc:
        raise InvalidDatum(f"cannot read {path}: {exc.strerror}") from None
