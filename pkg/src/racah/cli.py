"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from typing import Sequence

from .algebra import (
    graph_to_dot,
    graph_to_json_obj,
    make_model,
    relation_suite,
    shortest_chain_path,
    validate_chain,
)
from .linalg import format_rational, to_rational
from .polynomials import BetaLadder, kappa, racah_univariate, tratnik_multivariate
from .realizations import REALIZATIONS, RepSpec

PARAM_FLAGS = {"sphere": "b", "dunkl": "mu", "bg": "nu", "abstract": "nu", "discrete": "beta"}


class ConfigError(ValueError):
    pass


def parse_rationals(text) -> tuple[Fraction, ...]:
    if text is None:
        return ()
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        return tuple(to_rational(str(t).strip()) for t in items)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational list {text!r}: {exc}") from exc


def parse_ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def parse_subset(text: str) -> tuple[int, ...]:
    """``C12``, ``C_{123}``, ``12`` or, for indices above 9, ``C1.2.10``."""
    body = re.sub(r"[C_{}\s]", "", text)
    if not body:
        raise ConfigError(f"empty generator {text!r}")
    parts = re.split(r"[.\-]", body) if re.search(r"[.\-]", body) else list(body)
    try:
        return tuple(sorted(int(p) for p in parts))
    except ValueError as exc:
        raise ConfigError(f"bad generator {text!r}") from exc


def parse_chain(text, n: int):
    if isinstance(text, (list, tuple)):
        sets = [parse_subset(str(t)) if not isinstance(t, (list, tuple)) else tuple(t) for t in text]
    else:
        # split on commas outside braces
        sets = [parse_subset(t) for t in re.split(r",(?![^{]*\})", text.strip("()⟨⟩ ")) if t.strip()]
    try:
        return validate_chain(sets, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# configuration ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values; flags win")
    common.add_argument("--realization", choices=REALIZATIONS)
    common.add_argument("--n", type=int, help="number of sites (degree for 'poly racah')")
    common.add_argument("--k", help="degree k of the bg/dunkl space; degree vector for 'poly tratnik'")
    common.add_argument("--N", type=int, help="grid size of the discrete model / ladder size")
    common.add_argument("--nu", help="bg parameters, comma-separated p/q")
    common.add_argument("--b", help="sphere parameters")
    common.add_argument("--mu", help="Dunkl parameters")
    common.add_argument("--beta", help="discrete ladder beta_0..beta_{n-1} (single value for 'poly kappa')")
    common.add_argument("--format", choices=("json", "csv", "dot"))
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--fast", action="store_true", default=None, help="stop at the first failing relation")

    parser = argparse.ArgumentParser(prog="racah", description="Exact checks for the higher-rank Racah algebra")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the relation suite")
    p = sub.add_parser("connect", parents=[common], help="overlap matrix between two labeling chains")
    p.add_argument("--from", dest="from_chain")
    p.add_argument("--to", dest="to_chain")
    p.add_argument("--compare", choices=("racah", "tratnik", "bivariate", "formula"))
    sub.add_parser("graph", parents=[common], help="export the connection graph")
    p = sub.add_parser("poly", parents=[common], help="evaluate kappa, r_n or Tratnik polynomials")
    p.add_argument("kind", choices=("kappa", "racah", "tratnik"))
    p.add_argument("--x", help="argument")
    p.add_argument("--params", help="alpha,beta,gamma,delta")
    p.add_argument("--s", help="grid point for 'tratnik'")
    p = sub.add_parser("matrix", parents=[common], help="print the matrix of one generator")
    p.add_argument("--subset", required=False, help="generator, e.g. C12 or 1,2")
    sub.add_parser("discrete", parents=[common], help="checks of the discrete model")
    return parser


OPTION_KEYS = ("realization", "n", "k", "N", "nu", "b", "mu", "beta", "format", "out", "fast",
               "from_chain", "to_chain", "compare", "x", "params", "s", "subset")


def resolve(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if "from" in cfg:
            cfg["from_chain"] = cfg.pop("from")
        if "to" in cfg:
            cfg["to_chain"] = cfg.pop("to")
        if "params" in cfg and "realization" in cfg and args.command not in ("poly",):
            cfg.setdefault(PARAM_FLAGS.get(cfg["realization"], "nu"), cfg.pop("params"))
    out = dict(cfg)
    for key in OPTION_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    out["command"] = args.command
    if hasattr(args, "kind"):
        out["kind"] = args.kind
    return out


def spec_from(cfg: dict, default_realization: str = "bg") -> RepSpec:
    real = cfg.get("realization", default_realization)
    if "n" not in cfg:
        raise ConfigError("--n is required")
    n = int(cfg["n"])
    if n < 3:
        raise ConfigError("n must be ≥ 3")
    flag = PARAM_FLAGS[real]
    for other in set(PARAM_FLAGS.values()) - {flag}:
        if cfg.get(other) is not None:
            raise ConfigError(f"--{other} does not apply to the {real} realization (use --{flag})")
    params = parse_rationals(cfg.get(flag))
    size = cfg.get("N") if real == "discrete" else cfg.get("k")
    if size is None and real == "discrete":
        size = cfg.get("k")
    if size is None and real in ("bg", "abstract", "discrete"):
        raise ConfigError(f"the {real} realization needs --{'N' if real == 'discrete' else 'k'}")
    try:
        return RepSpec(real, n, params, None if size is None else int(size))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def ladder_for(spec: RepSpec) -> BetaLadder:
    if spec.realization == "discrete":
        return BetaLadder(spec.params, spec.k)
    if spec.realization in ("bg", "abstract"):
        return BetaLadder.from_nu(spec.params, spec.k)
    raise ConfigError("connection matrices need the bg or discrete realization (irreducible space)")


# output -------------------------------------------------------------------------

def emit(text: str, cfg: dict) -> None:
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def as_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def csv_text(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def matrix_rows_csv(matrix, row_labels=None, col_labels=None) -> str:
    rows = []
    if col_labels is not None:
        rows.append([""] + [" ".join(map(str, l)) for l in col_labels])
    for i, r in enumerate(matrix.tolist()):
        lead = [" ".join(map(str, row_labels[i]))] if row_labels is not None else []
        rows.append(lead + [format_rational(v) for v in r])
    return csv_text(rows)


# commands -------------------------------------------------------------------------

def cmd_verify(cfg: dict) -> int:
    spec = spec_from(cfg)
    model = make_model(spec)
    reports = relation_suite(model, fast=bool(cfg.get("fast")))
    passed = all(r.passed for r in reports)
    if cfg.get("format") == "csv":
        rows = [["relation", "args", "pass"]]
        rows += [[r.relation, " ".join("".join(map(str, a)) if isinstance(a, tuple) else str(a) for a in r.args),
                  "pass" if r.passed else "FAIL"] for r in reports]
        emit(csv_text(rows), cfg)
    else:
        emit(as_json({
            "spec": spec.to_json_obj(),
            "model": model.name,
            "checked": len(reports),
            "failed": sum(1 for r in reports if not r.passed),
            "pass": passed,
            "relations": [r.to_json_obj() for r in reports],
        }), cfg)
    return 0 if passed else 1


def cmd_connect(cfg: dict) -> int:
    from .connection import (
        bivariate_formula_matrix,
        compose_path,
        final_chain,
        formula_path_matrix,
        gauge_equal,
        initial_chain,
        lemma_overlap_matrix,
        tratnik_matrix,
    )

    spec = spec_from(cfg)
    n = spec.n
    ladder = ladder_for(spec)
    start = parse_chain(cfg["from_chain"], n) if cfg.get("from_chain") else initial_chain(n)
    end = parse_chain(cfg["to_chain"], n) if cfg.get("to_chain") else final_chain(n)
    model = make_model(spec, symbolic=False)
    if start == end:
        from .connection import connection_matrix
        overlap = connection_matrix(start, end, model, ladder)
        overlap.path = [start]
    else:
        path = shortest_chain_path(n, start, end)
        overlap = compose_path(path, model, ladder)
    out = {"spec": spec.to_json_obj(), "ladder": ladder.to_json_obj()}
    out.update(overlap.to_json_obj())
    code = 0
    compare = cfg.get("compare")
    if compare:
        if compare == "racah":
            if n != 3 or (start, end) != (((1, 2),), ((2, 3),)):
                raise ConfigError("--compare racah needs n=3, from C12 to C23")
            ref = lemma_overlap_matrix(ladder)
        elif compare == "tratnik":
            if (start, end) != (initial_chain(n), final_chain(n)):
                raise ConfigError("--compare tratnik needs the initial and final chains")
            ref = tratnik_matrix(ladder).matrix
        elif compare == "bivariate":
            from .connection import BIVARIATE_PATH
            if (start, end) != (BIVARIATE_PATH[0], BIVARIATE_PATH[-1]):
                raise ConfigError("--compare bivariate needs n=4, from (C12,C123) to (C34,C234)")
            ref = bivariate_formula_matrix(ladder).matrix
        else:
            ref = formula_path_matrix(overlap.path, ladder).matrix
        res = gauge_equal(overlap.matrix, ref, two_sided=True)
        out["compare"] = {"against": compare, "row_gauge_only": gauge_equal(overlap.matrix, ref).equal}
        out["compare"].update(res.to_json_obj())
        code = 0 if res.equal else 1
    if cfg.get("format") == "csv":
        emit(matrix_rows_csv(overlap.matrix, overlap.row_labels, overlap.col_labels), cfg)
    else:
        emit(as_json(out), cfg)
    return code


def cmd_graph(cfg: dict) -> int:
    if "n" not in cfg:
        raise ConfigError("--n is required")
    n = int(cfg["n"])
    if n < 3:
        raise ConfigError("n must be ≥ 3")
    fmt = cfg.get("format", "json")
    if fmt == "dot":
        emit(graph_to_dot(n), cfg)
    elif fmt == "csv":
        obj = graph_to_json_obj(n)
        emit(csv_text([["source", "target"]] + obj["edge_list"]), cfg)
    else:
        emit(as_json(graph_to_json_obj(n)), cfg)
    return 0


def cmd_poly(cfg: dict) -> int:
    kind = cfg["kind"]
    if kind == "kappa":
        if cfg.get("x") is None or cfg.get("beta") is None:
            raise ConfigError("kappa needs --x and --beta")
        val = kappa(to_rational(str(cfg["x"])), to_rational(str(cfg["beta"])))
    elif kind == "racah":
        if cfg.get("n") is None:
            raise ConfigError("racah needs --n (degree)")
        params = parse_rationals(cfg.get("params", "0,0,0,0"))
        if len(params) != 4:
            raise ConfigError("--params needs alpha,beta,gamma,delta")
        x = to_rational(str(cfg.get("x", "0")))
        val = racah_univariate(int(cfg["n"]), params, x)
    else:
        betas = parse_rationals(cfg.get("beta"))
        if cfg.get("N") is None or len(betas) < 3:
            raise ConfigError("tratnik needs --beta with n >= 3 values and --N")
        ladder = BetaLadder(betas, int(cfg["N"]))
        k, s = parse_ints(cfg.get("k", "")), parse_ints(cfg.get("s", ""))
        try:
            val = tratnik_multivariate(k, s, ladder)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    emit(format_rational(val) + "\n", cfg)
    return 0


def cmd_matrix(cfg: dict) -> int:
    spec = spec_from(cfg)
    if spec.realization == "sphere":
        raise ConfigError("the sphere realization has no finite matrix form")
    if spec.k is None:
        raise ConfigError("a matrix needs a degree --k (or --N)")
    model = make_model(spec, symbolic=False)
    if not cfg.get("subset"):
        raise ConfigError("--subset is required")
    A = parse_subset(cfg["subset"])
    mat = model.generator(A)
    if cfg.get("format") == "csv":
        emit(matrix_rows_csv(mat), cfg)
        return 0
    out = {"spec": spec.to_json_obj(), "subset": list(A), "model": model.name}
    if spec.realization == "discrete":
        out["grid"] = model.grid.to_json_obj()
    out["matrix"] = mat.to_json_obj()
    emit(as_json(out), cfg)
    return 0


def cmd_discrete(cfg: dict) -> int:
    from .discrete import grid_invariance_report, verify_discrete_eigenfunctions

    cfg = dict(cfg)
    cfg["realization"] = "discrete"
    spec = spec_from(cfg, "discrete")
    reports = [grid_invariance_report(spec.n, spec.k, spec.params),
               verify_discrete_eigenfunctions(spec.n, spec.k, spec.params)]
    suite = relation_suite(make_model(spec), fast=bool(cfg.get("fast")))
    passed = all(r.passed for r in reports + suite)
    emit(as_json({
        "spec": spec.to_json_obj(),
        "checks": [r.to_json_obj() for r in reports],
        "relation_suite": {"checked": len(suite), "failed": sum(1 for r in suite if not r.passed)},
        "pass": passed,
    }), cfg)
    return 0 if passed else 1


COMMANDS = {
    "verify": cmd_verify,
    "connect": cmd_connect,
    "graph": cmd_graph,
    "poly": cmd_poly,
    "matrix": cmd_matrix,
    "discrete": cmd_discrete,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
