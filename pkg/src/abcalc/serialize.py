"""JSON schemas for every exchange format.

All rationals travel as strings ("p/q" or "p"); series as arrays of those,
index = b-power.
"""

from __future__ import annotations

from .embedding import EmbeddingResult
from .frescos import BernsteinPolynomial, FactoredFresco, PoleReport
from .lattices import Lattice
from .modules import ModulePresentation
from .monodromy import FiltrationResult
from .rationals import rat, rat_str
from .series import series_from_strings, series_to_strings


def module_to_json(e: ModulePresentation) -> dict:
    return {
        "rank": e.rank,
        "b_order": e.b_order,
        "amat": [[series_to_strings(s) for s in row] for row in e.amat],
    }


def module_from_json(data: dict) -> ModulePresentation:
    order = int(data["b_order"])
    amat = [
        [series_from_strings(entry, order) for entry in row]
        for row in data["amat"]
    ]
    e = ModulePresentation(amat)
    if "rank" in data and int(data["rank"]) != e.rank:
        raise ValueError("rank field does not match the matrix size")
    return e


def vector_to_json(vec) -> list:
    return [series_to_strings(s) for s in vec]


def vector_from_json(data, order: int):
    return [series_from_strings(entry, order) for entry in data]


def lattice_to_json(lat: Lattice) -> dict:
    return {"generators": [vector_to_json(list(row)) for row in lat.rows]}


def lattice_from_json(data: dict, width: int, order: int) -> Lattice:
    gens = [vector_from_json(entry, order) for entry in data["generators"]]
    return Lattice(gens, width, order)


def fresco_to_json(f: FactoredFresco) -> dict:
    return {
        "b_order": f.b_order,
        "factors": [
            {"lambda": rat_str(lam), "T": series_to_strings(t)}
            for lam, t in f.factors
        ],
    }


def fresco_from_json(data: dict) -> FactoredFresco:
    order = int(data["b_order"])
    factors = [
        (rat(item["lambda"]), series_from_strings(item["T"], order))
        for item in data["factors"]
    ]
    return FactoredFresco(factors, b_order=order)


def bernstein_to_json(b: BernsteinPolynomial) -> dict:
    return {"roots": [rat_str(r) for r in b.roots]}


def filtration_to_json(res: FiltrationResult) -> dict:
    return {
        "ranks": list(res.quotient_ranks),
        "d": res.nilpotent_order,
        "steps": [lattice_to_json(s) for s in res.steps],
    }


def pole_report_to_json(report: PoleReport) -> dict:
    return {
        "classes": [
            {
                "alpha": rat_str(c.alpha),
                "d": c.depth,
                "B": [[rat_str(r) for r in p.roots] for p in c.polynomials],
                "predicted_pole_order_d_at": rat_str(c.top_pole),
                "first_pole_at": rat_str(c.first_pole),
            }
            for c in report.classes
        ]
    }


def embedding_to_json(res: EmbeddingResult) -> dict:
    return {
        "blocks": [
            {
                "alpha": rat_str(b.alpha),
                "log_depth": b.n_log,
                "directions": b.dirs,
            }
            for b in res.blocks
        ],
        "b_order": res.phi_rows[0][0].order if res.phi_rows else 0,
        "phi": [vector_to_json(row) for row in res.phi_rows],
    }
