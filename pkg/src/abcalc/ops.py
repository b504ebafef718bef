"""Operation handlers shared by the CLI and the HTTP service.

Each handler takes plain data (strings, dicts) and returns a plain dict with
a deterministic key order; domain failures raise AbcalcError subclasses, and
both front ends map those to their error channels.
"""

from __future__ import annotations

from . import serialize
from .embedding import embed_in_xi
from .errors import AbcalcError
from .frescos import (
    bernstein_fresco,
    higher_bernstein,
    is_semisimple_fresco,
    pole_report,
    primitive_parts,
    principal_jh,
)
from .modules import (
    apply_op,
    bernstein_min,
    decompose_primitive,
    saturate,
    solve_shifted,
    tensor,
)
from .monodromy import semisimple_filtration
from .operators import (
    GradedOperator,
    ab_mul,
    divide_linear,
    format_operator,
    invert_graded,
)
from .parsing import parse_element
from .rationals import rat, rat_str
from .series import format_series


def op_eval(expr: str, order: int) -> dict:
    x = parse_element(expr, order)
    return {"result": format_operator(x), "order": order}


def op_mul(exprs: list[str], order: int) -> dict:
    if len(exprs) < 2:
        raise ValueError("mul needs at least two --expr arguments")
    acc = parse_element(exprs[0], order)
    for text in exprs[1:]:
        acc = ab_mul(acc, parse_element(text, order))
    return {"result": format_operator(acc), "order": order}


def op_divide(expr: str, lam: str, order: int) -> dict:
    x = parse_element(expr, order)
    q, r = divide_linear(x, rat(lam))
    return {"Q": format_operator(q), "R": format_series(r)}


def op_invert(expr: str, order: int) -> dict:
    x = parse_element(expr, order)
    graded = GradedOperator(order, dict(x.terms))
    inv = invert_graded(graded)
    return {
        "result": format_operator(inv.to_ab(order)),
        "total_order": order,
    }


def op_module_apply(module: dict, expr: str, vector: list) -> dict:
    e = serialize.module_from_json(module)
    x = parse_element(expr, e.b_order)
    v = serialize.vector_from_json(vector, e.b_order)
    out = apply_op(e, x, v)
    return {"vector": serialize.vector_to_json(out)}


def op_saturate(module: dict) -> dict:
    e = serialize.module_from_json(module)
    res = saturate(e)
    return {
        "module": serialize.module_to_json(res.module),
        "inclusion": [serialize.vector_to_json(r) for r in res.inclusion],
        "codim": res.codim,
        "shift": res.shift,
    }


def op_bernstein(module: dict | None = None, fresco: dict | None = None) -> dict:
    if fresco is not None:
        f = serialize.fresco_from_json(fresco)
        roots = list(bernstein_fresco(f).roots)
    elif module is not None:
        e = serialize.module_from_json(module)
        roots = bernstein_min(e)
    else:
        raise ValueError("bernstein needs --module or --fresco")
    return {"roots": [rat_str(r) for r in roots]}


def op_decompose(module: dict) -> dict:
    e = serialize.module_from_json(module)
    parts = decompose_primitive(e)
    return {
        "classes": [
            {
                "alpha": rat_str(alpha),
                "module": serialize.module_to_json(parts[alpha].presentation),
                "basis": [
                    serialize.vector_to_json(r) for r in parts[alpha].basis_rows
                ],
            }
            for alpha in sorted(parts)
        ]
    }


def op_filtration(module: dict, with_steps: bool = False) -> dict:
    e = serialize.module_from_json(module)
    res = semisimple_filtration(e)
    if with_steps:
        return serialize.filtration_to_json(res)
    return {"ranks": list(res.quotient_ranks), "d": res.nilpotent_order}


def op_jh(fresco: dict) -> dict:
    f = serialize.fresco_from_json(fresco)
    if len(f.classes()) == 1:
        seq = principal_jh(f)
        return {
            "classes": [
                {
                    "alpha": rat_str(f.classes()[0]),
                    "values": [rat_str(v) for v in seq.values],
                    "principal": seq.principal,
                }
            ]
        }
    parts = primitive_parts(f)
    out = []
    for alpha in sorted(parts):
        seq = principal_jh(parts[alpha][1])
        out.append(
            {
                "alpha": rat_str(alpha),
                "values": [rat_str(v) for v in seq.values],
                "principal": seq.principal,
            }
        )
    return {"classes": out}


def op_higher_bernstein(fresco: dict) -> dict:
    f = serialize.fresco_from_json(fresco)
    polys = higher_bernstein(f)
    return {
        "B": [[rat_str(r) for r in p.roots] for p in polys],
        "d": len(polys),
    }


def op_semisimple(fresco: dict) -> dict:
    f = serialize.fresco_from_json(fresco)
    return {"semisimple": is_semisimple_fresco(f)}


def op_embed(module: dict) -> dict:
    e = serialize.module_from_json(module)
    return serialize.embedding_to_json(embed_in_xi(e))


def op_pole_report(fresco: dict) -> dict:
    f = serialize.fresco_from_json(fresco)
    return serialize.pole_report_to_json(pole_report(f))


def op_tensor(modules: list[dict]) -> dict:
    if len(modules) != 2:
        raise ValueError("tensor needs exactly two --module arguments")
    e = serialize.module_from_json(modules[0])
    f = serialize.module_from_json(modules[1])
    return serialize.module_to_json(tensor(e, f))


def op_solve(module: dict, lam: str, vector: list) -> dict:
    e = serialize.module_from_json(module)
    y = serialize.vector_from_json(vector, e.b_order)
    x = solve_shifted(e, rat(lam), y)
    return {"vector": serialize.vector_to_json(x)}
