"""Command-line front end: a thin client over the shared operations layer.

All numeric I/O uses rational strings, never floats; identical invocations
produce byte-identical output.  Exit codes: 0 success, 1 domain error
(resonance, non-geometric input, ...), 2 usage or expression parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import ops
from .errors import AbcalcError, SyntaxErrorAt
from .series import DEFAULT_ORDER

VERBS = [
    "eval",
    "mul",
    "divide",
    "invert",
    "module-apply",
    "saturate",
    "bernstein",
    "decompose",
    "filtration",
    "jh",
    "higher-bernstein",
    "semisimple",
    "embed",
    "pole-report",
    "tensor",
    "solve",
]


def default_order() -> int:
    env = os.environ.get("ABCALC_ORDER")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_ORDER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcalc",
        description="exact calculus for the operator algebra ab - ba = b^2",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--order", type=int, default=None)
        p.add_argument("--expr", action="append", default=None)
        p.add_argument("--lambda", dest="lam", default=None)
        p.add_argument("--module", action="append", default=None)
        p.add_argument("--fresco", default=None)
        p.add_argument("--vector", default=None)
        p.add_argument("--steps", action="store_true")
        p.add_argument("--json", action="store_true")
        p.add_argument("--text", action="store_true")
    return parser


def _load_json_arg(value: str):
    """Inline JSON, or @path to read a file."""
    if value.startswith("@"):
        with open(value[1:], "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(value)


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"missing required {flag}")
    return value


class UsageError(Exception):
    pass


def dispatch(args) -> dict:
    order = args.order if args.order is not None else default_order()
    if order < 2:
        raise UsageError("--order must be at least 2")
    verb = args.verb
    if verb == "eval":
        return ops.op_eval(_require(args.expr, "--expr")[0], order)
    if verb == "mul":
        return ops.op_mul(_require(args.expr, "--expr"), order)
    if verb == "divide":
        return ops.op_divide(
            _require(args.expr, "--expr")[0], _require(args.lam, "--lambda"), order
        )
    if verb == "invert":
        return ops.op_invert(_require(args.expr, "--expr")[0], order)
    if verb == "module-apply":
        return ops.op_module_apply(
            _load_json_arg(_require(args.module, "--module")[0]),
            _require(args.expr, "--expr")[0],
            _load_json_arg(_require(args.vector, "--vector")),
        )
    if verb == "saturate":
        return ops.op_saturate(_load_json_arg(_require(args.module, "--module")[0]))
    if verb == "bernstein":
        module = _load_json_arg(args.module[0]) if args.module else None
        fresco = _load_json_arg(args.fresco) if args.fresco else None
        return ops.op_bernstein(module=module, fresco=fresco)
    if verb == "decompose":
        return ops.op_decompose(_load_json_arg(_require(args.module, "--module")[0]))
    if verb == "filtration":
        return ops.op_filtration(
            _load_json_arg(_require(args.module, "--module")[0]),
            with_steps=args.steps,
        )
    if verb == "jh":
        return ops.op_jh(_load_json_arg(_require(args.fresco, "--fresco")))
    if verb == "higher-bernstein":
        return ops.op_higher_bernstein(_load_json_arg(_require(args.fresco, "--fresco")))
    if verb == "semisimple":
        return ops.op_semisimple(_load_json_arg(_require(args.fresco, "--fresco")))
    if verb == "embed":
        return ops.op_embed(_load_json_arg(_require(args.module, "--module")[0]))
    if verb == "pole-report":
        return ops.op_pole_report(_load_json_arg(_require(args.fresco, "--fresco")))
    if verb == "tensor":
        mods = _require(args.module, "--module")
        return ops.op_tensor([_load_json_arg(m) for m in mods])
    if verb == "solve":
        return ops.op_solve(
            _load_json_arg(_require(args.module, "--module")[0]),
            _require(args.lam, "--lambda"),
            _load_json_arg(_require(args.vector, "--vector")),
        )
    raise UsageError(f"unknown verb {verb}")


def render(result: dict, as_text: bool) -> str:
    if as_text:
        lines = []
        for key, value in result.items():
            lines.append(f"{key}: {json.dumps(value, separators=(',', ':'))}")
        return "\n".join(lines)
    return json.dumps(result, separators=(",", ":"))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = dispatch(args)
    except SyntaxErrorAt as exc:
        print(
            json.dumps(
                {"error": exc.name, "detail": str(exc), "position": exc.position},
                separators=(",", ":"),
            )
        )
        return 2
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}, separators=(",", ":")))
        return 2
    except (json.JSONDecodeError, ValueError, KeyError, OSError) as exc:
        print(
            json.dumps(
                {"error": "usage", "detail": f"bad input: {exc}"},
                separators=(",", ":"),
            )
        )
        return 2
    except AbcalcError as exc:
        print(
            json.dumps(
                {"error": exc.name, "detail": str(exc)}, separators=(",", ":")
            )
        )
        return 1
    print(render(result, args.text))
    return 0


if __name__ == "__main__":
    sys.exit(main())
