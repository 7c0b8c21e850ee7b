"""Lie-Poisson bracket on divergence-free fields and the Jacobi cycle.

Convention (used everywhere in the package)::

    {f, g}(v) = <dg(v), nabla_{df(v)} v> - <df(v), nabla_{dg(v)} v>
              = <[dg(v), df(v)], v>,      [X, Y] = nabla_X Y - nabla_Y X.

The second line is the Lie-algebra form; the two agree because advection
by a divergence-free field is L2-antisymmetric.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass

from . import fields as fc
from .fields import DivFreeField
from .hodge import leray
from .observables import (Observable, advect, b_op, differential, lie_bracket,
                          second_differential, value)

AREA = 4.0 * math.pi**2


def _terms(f: Observable, g: Observable, v: DivFreeField):
    df, dg = differential(f, v), differential(g, v)
    return fc.inner(dg, advect(df, v)), fc.inner(df, advect(dg, v))


def bracket(f: Observable, g: Observable, v: DivFreeField) -> float:
    if f is g:
        return 0.0
    a, b = _terms(f, g, v)
    return a - b


def bracket_liealg(f: Observable, g: Observable, v: DivFreeField) -> float:
    """``<[dg(v), df(v)], v>``."""
    if f is g:
        return 0.0
    return fc.inner(lie_bracket(differential(g, v), differential(f, v)), v)


def bracket_differential(f: Observable, g: Observable, v: DivFreeField) -> DivFreeField:
    """Closed-form Riesz representative of ``d{f,g}(v)``.

    ``P_e[nabla_dg df - nabla_df dg] + Ddf.B(dg, v) - Ddg.B(df, v)
    + Ddg.P_e nabla_df v - Ddf.P_e nabla_dg v``.
    """
    if f is g:
        return DivFreeField.zeros(v.grid)
    df, dg = differential(f, v), differential(g, v)
    out = leray(advect(dg, df) - advect(df, dg))
    out = out + second_differential(f, v, b_op(dg, v))
    out = out - second_differential(g, v, b_op(df, v))
    out = out + second_differential(g, v, leray(advect(df, v)))
    out = out - second_differential(f, v, leray(advect(dg, v)))
    return out


def bracket_observable(f: Observable, g: Observable) -> Observable:
    """``{f, g}`` as an observable with first-order information only."""
    return Observable(
        "bracket",
        lambda v: bracket(f, g, v),
        lambda v: bracket_differential(f, g, v),
        None,
        {"of": [f.describe(), g.describe()]},
    )


def bracket_scale(v: DivFreeField, *diffs: DivFreeField) -> float:
    """Magnitude scale for brackets built from ``diffs`` at ``v``.

    ``||v|| prod ||d_i|| * (kmax / sqrt(AREA))^m`` with ``m = len(diffs) - 1``
    derivatives (one per nesting level): an integral of ``m + 2`` factors,
    each of pointwise size ``||.|| / sqrt(AREA)``.
    """
    m = len(diffs) - 1
    s = v.norm()
    for d in diffs:
        s *= d.norm()
    return s * (v.grid.kmax / math.sqrt(AREA)) ** m


def jacobi_cycle(f: Observable, g: Observable, h: Observable, v: DivFreeField) -> float:
    """``{f,{g,h}} + {h,{f,g}} + {g,{h,f}}`` evaluated with closed-form differentials."""
    if f is g or g is h or h is f:
        return 0.0
    return (bracket(f, bracket_observable(g, h), v)
            + bracket(h, bracket_observable(f, g), v)
            + bracket(g, bracket_observable(h, f), v))


def jacobi_scale(f, g, h, v) -> float:
    return bracket_scale(v, differential(f, v), differential(g, v), differential(h, v))


@dataclass(frozen=True)
class BracketReport:
    value: float
    liealgebra_value: float
    gap: float
    scale: float
    inputs_digest: str
    n: int
    kmax: int
    seed: int | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        return {"value": d["value"], "liealgebra_value": d["liealgebra_value"],
                "gap": d["gap"], "scale": d["scale"], "inputs_digest": d["inputs_digest"],
                "grid": {"n": d["n"], "kmax": d["kmax"]}, "seed": d["seed"]}


def bracket_report(f: Observable, g: Observable, v: DivFreeField,
                   seed: int | None = None) -> BracketReport:
    a = bracket(f, g, v)
    b = bracket_liealg(f, g, v)
    hsh = hashlib.sha256()
    hsh.update(f.digest().encode())
    hsh.update(g.digest().encode())
    hsh.update(v.data.tobytes())
    scale = bracket_scale(v, differential(f, v), differential(g, v))
    return BracketReport(a, b, abs(a - b), scale, hsh.hexdigest()[:16],
                         v.grid.n, v.grid.kmax, seed)


def derivation_gap(f: Observable, g: Observable, h: Observable, v: DivFreeField) -> float:
    """``{fg, h} - f{g,h} - g{f,h}`` for the product observable ``fg``."""
    from .observables import product

    fg = product(f, g)
    return bracket(fg, h, v) - value(f, v) * bracket(g, h, v) - value(g, v) * bracket(f, h, v)
