"""Command-line front end.

Problem files are JSON documents::

    {"d": 2,
     "P": [[0.7, 0.3], [0.2, 0.8]],
     "Q": [["3/5", "2/5"], ["1/4", "3/4"]],
     "options": {"mode": "matrix-sufficient", "resolution": 8}}

``P`` and ``Q`` list the ``d`` columns. Entries may be JSON numbers, decimal
strings or exact fractions ``"a/b"``; all are parsed losslessly into
Fractions. Effective settings are the defaults, overridden by the file's
``options`` block, overridden by command-line flags.

Exit codes: 0 when a verdict or search result was produced (whatever it
is), 2 for invalid input, 3 when a size cap was exceeded, 4 on numerical
failure.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .core import TOL_NORM, as_tuple, kron, tuple_boxtimes
from .criteria import (TOL_STRICT, build_grid, check_aubrun_nechita, check_jensen, check_klimesh,
                       check_matrix_necessary, check_matrix_sufficient, check_relative, scan_rows)
from .errors import NumericalFailure, ParseError, SizeCapExceeded, ValidationError
from .majorization import (TOL_CMP, bistochastic_witness, exact_matrix_majorizes, hlp_majorizes,
                           matrix_majorizes)
from .witness import (approx_catalytic_search, build_catalyst_tuple, build_catalyst_vector,
                      catalytic_transition, find_asymptotic_n)

MODES = ("oneshot", "aubrun-nechita", "klimesh", "jensen", "matrix-sufficient",
         "matrix-necessary", "relative")

DEFAULTS = {
    "mode": "oneshot",
    "resolution": None,
    "lambda_max": 64.0,
    "n_max": 8,
    "epsilon": None,
    "tol_cmp": TOL_CMP,
    "tol_strict": TOL_STRICT,
    "exact": False,
    "seed": 0,
    "fixed_column": None,
}

EXIT_OK, EXIT_VALIDATION, EXIT_CAP, EXIT_NUMERICAL = 0, 2, 3, 4


# Problem files ---------------------------------------------------------------

@dataclass
class Problem:
    """Parsed problem: ``P`` and ``Q`` are lists of ``d`` Fraction columns."""

    d: int
    P: list
    Q: list
    options: dict = field(default_factory=dict)

    def tuple_exact(self, which):
        cols = self.P if which == "P" else self.Q
        return np.array([[c[i] for c in cols] for i in range(len(cols[0]))], dtype=object)

    def tuple_float(self, which):
        return self.tuple_exact(which).astype(float)

    def to_dict(self):
        return {"d": self.d, "P": [[format_number(v) for v in c] for c in self.P],
                "Q": [[format_number(v) for v in c] for c in self.Q],
                "options": dict(self.options)}


def parse_number(value, field_name):
    """Lossless conversion of a JSON number or numeric string to Fraction."""
    if isinstance(value, bool):
        raise ParseError(f"expected a number, got {value!r}", field=field_name)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"cannot parse number {value!r}", field=field_name) from None
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParseError(f"non-finite number {value!r}", field=field_name)
        return Fraction(value)
    raise ParseError(f"expected a number, got {type(value).__name__}", field=field_name)


def format_number(x):
    """``"a/b"`` (or ``"a"``) for a Fraction."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_columns(doc, key, d):
    if key not in doc:
        raise ParseError("missing key", field=key)
    cols = doc[key]
    if not isinstance(cols, list) or not cols:
        raise ParseError("expected a nonempty list of columns", field=key)
    if len(cols) != d:
        raise ValidationError(f"{key} has {len(cols)} columns but d={d}")
    out = []
    for k, col in enumerate(cols):
        if not isinstance(col, list) or not col:
            raise ParseError("expected a nonempty list of numbers", field=f"{key}[{k}]")
        out.append([parse_number(v, f"{key}[{k}][{i}]") for i, v in enumerate(col)])
    if len({len(c) for c in out}) != 1:
        raise ValidationError(f"columns of {key} have different lengths")
    return out


def parse_problem(text, tol_norm=TOL_NORM):
    """Parse and validate a problem document."""
    try:
        doc = json.loads(text, parse_float=Fraction, parse_int=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if "d" not in doc:
        raise ParseError("missing key", field="d")
    d = doc["d"]
    if not isinstance(d, Fraction) or d.denominator != 1 or d < 1:
        raise ParseError("d must be a positive integer", field="d")
    d = int(d)
    P = _parse_columns(doc, "P", d)
    Q = _parse_columns(doc, "Q", d)
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("options must be an object", field="options")
    options = {k: _plain(v) for k, v in options.items()}
    unknown = set(options) - set(DEFAULTS)
    if unknown:
        raise ParseError(f"unknown option(s) {sorted(unknown)}", field="options")
    problem = Problem(d, P, Q, options)
    for which in ("P", "Q"):
        _validate_tuple(problem.tuple_exact(which), which, tol_norm)
    return problem


def _plain(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


def _validate_tuple(T, name, tol_norm):
    try:
        as_tuple(T)
    except ValidationError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    for k in range(T.shape[1]):
        total = sum(T[:, k])
        if abs(float(total) - 1.0) > tol_norm:
            raise ValidationError(f"{name}: column {k} sums to {float(total)!r}, not 1")


def serialize_problem(problem):
    return json.dumps(problem.to_dict(), indent=2) + "\n"


# Reports ---------------------------------------------------------------------

def matrix_to_dict(T):
    """Row-major serialization with explicit dimensions."""
    T = np.asarray(T)
    if T.dtype == object:
        data = [format_number(v) for v in T.ravel()]
    else:
        data = [float(v) for v in T.ravel()]
    return {"rows": int(T.shape[0]), "cols": int(T.shape[1]), "data": data}


def matrix_from_dict(doc):
    data = doc["data"]
    if data and isinstance(data[0], str):
        arr = np.array([Fraction(v) for v in data], dtype=object)
    else:
        arr = np.array(data, dtype=float)
    return arr.reshape(doc["rows"], doc["cols"])


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, Fraction):
        return format_number(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def serialize_report(report):
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def parse_report(text):
    return json.loads(text)


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".matmaj-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# Commands --------------------------------------------------------------------

def _grid(problem, config):
    return build_grid(problem.d, config["resolution"], config["lambda_max"])


def _tols(config):
    return {"tol_cmp": config["tol_cmp"], "tol_strict": config["tol_strict"]}


def _require_d(problem, allowed, mode):
    if problem.d not in allowed:
        raise ValidationError(f"mode {mode} needs d in {sorted(allowed)}, got d={problem.d}")


def cmd_check(problem, config):
    """Run the selected criterion and return the result section of the report."""
    mode = config["mode"]
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    P, Q = problem.tuple_float("P"), problem.tuple_float("Q")
    if mode == "oneshot":
        return _oneshot(problem, config)
    if mode in ("aubrun-nechita", "klimesh", "jensen"):
        _require_d(problem, {1}, mode)
        fn = {"aubrun-nechita": check_aubrun_nechita, "klimesh": check_klimesh,
              "jensen": check_jensen}[mode]
        return fn(P[:, 0], Q[:, 0], _grid(problem, config), **_tols(config)).to_dict()
    if mode == "relative":
        _require_d(problem, {2}, mode)
        return check_relative(P[:, 0], P[:, 1], Q[:, 0], Q[:, 1], _grid(problem, config),
                              **_tols(config)).to_dict()
    _require_d(problem, set(range(2, 7)), mode)
    if mode == "matrix-sufficient":
        return check_matrix_sufficient(P, Q, _grid(problem, config), mu_pairwise=True,
                                       **_tols(config)).to_dict()
    return check_matrix_necessary(P, Q, _grid(problem, config), **_tols(config)).to_dict()


def _oneshot(problem, config):
    if problem.d == 1:
        if config["exact"]:
            ok = hlp_majorizes(problem.tuple_exact("P")[:, 0], problem.tuple_exact("Q")[:, 0])
        else:
            ok = hlp_majorizes(problem.tuple_float("P")[:, 0], problem.tuple_float("Q")[:, 0],
                               tol=config["tol_cmp"])
        out = {"criterion": "majorization", "feasible": bool(ok), "exact": config["exact"]}
        if ok:
            p, q = problem.tuple_float("P")[:, 0], problem.tuple_float("Q")[:, 0]
            T = bistochastic_witness(p, q, tol=config["tol_cmp"])
            out["witness"] = matrix_to_dict(T)
        return out
    if config["exact"]:
        res = exact_matrix_majorizes(problem.tuple_exact("P"), problem.tuple_exact("Q"))
    else:
        res = matrix_majorizes(problem.tuple_float("P"), problem.tuple_float("Q"))
    out = {"criterion": "matrix-majorization", "feasible": res.feasible,
           "exact": config["exact"], "reason": res.reason,
           "residual": res.residual if res.feasible else None}
    if res.feasible:
        out["witness"] = matrix_to_dict(res.witness)
    return out


def cmd_witness(problem, config):
    """Search for tensor-power or approximate catalytic witnesses."""
    P, Q = problem.tuple_float("P"), problem.tuple_float("Q")
    n_max = int(config["n_max"])
    if config["epsilon"] is not None:
        _require_d(problem, set(range(2, 7)), "witness --epsilon")
        res = approx_catalytic_search(P, Q, float(config["epsilon"]), n_max=n_max,
                                      fixed_column=config["fixed_column"],
                                      grid=_grid(problem, config))
        out = {"kind": "approximate-catalytic", "found": res.found, "reason": res.reason,
               "epsilon": res.epsilon, "necessary_verdict": res.necessary.verdict.value}
        if res.q_eps is not None:
            out["q_eps"] = [res.q_eps[:, k].tolist() for k in range(problem.d)]
            out["perturbation_l1"] = res.perturbation
            out["sufficient_verdict"] = res.sufficient.verdict.value
        if res.found:
            out["n"] = res.n
            out["catalyst"] = [res.catalyst.columns[:, k].tolist() for k in range(problem.d)]
            out["transition"] = matrix_to_dict(res.transition)
            out["residual"] = res.residual
        return out
    found = find_asymptotic_n(P, Q, n_max=n_max)
    out = {"kind": "asymptotic", "found": found is not None, "n_max": n_max}
    if found is None:
        out["reason"] = f"no n <= {n_max} found (not a refutation)"
        return out
    out["n"] = found.n
    out["residual"] = found.residual
    out["notes"] = found.notes
    if found.transition is not None:
        out["transition"] = matrix_to_dict(found.transition)
    if problem.d == 1:
        p, q = P[:, 0], Q[:, 0]
        r = build_catalyst_vector(p, q, found.n)
        out["catalyst"] = [r.tolist()]
        out["catalytic_majorization_verified"] = hlp_majorizes(kron(p, r), kron(q, r),
                                                               tol=config["tol_cmp"])
        return out
    R = build_catalyst_tuple(P, Q, found.n)
    T = catalytic_transition(P.shape[0], Q.shape[0], found.n, found.transition)
    out["catalyst"] = [R.columns[:, k].tolist() for k in range(problem.d)]
    out["catalytic_transition"] = matrix_to_dict(T)
    out["catalytic_residual"] = float(np.abs(T @ tuple_boxtimes(P, R.columns)
                                             - tuple_boxtimes(Q, R.columns)).max())
    return out


def cmd_scan(problem, config):
    """Tabulate ``(parameter, value_P, value_Q, margin)`` over the grid."""
    grid = _grid(problem, config)
    rows = scan_rows(problem.tuple_float("P"), problem.tuple_float("Q"), grid)
    return {"kind": "scan", "grid": grid.metadata(), "rows": rows}


COMMANDS = {"check": cmd_check, "witness": cmd_witness, "scan": cmd_scan}


def build_parser():
    parser = argparse.ArgumentParser(prog="matmaj", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"matmaj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("problem", help="problem file (JSON)")
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--resolution", type=int)
        p.add_argument("--lambda-max", dest="lambda_max", type=float)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--tol-cmp", dest="tol_cmp", type=float)
        p.add_argument("--tol-strict", dest="tol_strict", type=float)
        p.add_argument("--exact", action="store_const", const=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--fixed-column", dest="fixed_column", type=int)
        p.add_argument("--out", help="report path (default: stdout)")
    return parser


def effective_config(problem, args):
    config = dict(DEFAULTS)
    config.update(problem.options)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def run(argv=None):
    """Execute a command; returns ``(exit_code, report_dict)``."""
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = {"tool": "matmaj", "version": __version__, "command": args.command}
    try:
        with open(args.problem) as fh:
            text = fh.read()
        problem = parse_problem(text)
        config = effective_config(problem, args)
        report["config"] = config
        report["problem"] = problem.to_dict()
        np.random.seed(int(config["seed"]) % 2**32)
        report["result"] = COMMANDS[args.command](problem, config)
        report["status"] = "ok"
        code = EXIT_OK
    except OSError as exc:
        report.update(status="validation_error", error=str(exc))
        code = EXIT_VALIDATION
    except ValidationError as exc:
        report.update(status="validation_error", error=str(exc))
        code = EXIT_VALIDATION
    except SizeCapExceeded as exc:
        report.update(status="cap_exceeded", error=str(exc))
        code = EXIT_CAP
    except NumericalFailure as exc:
        report.update(status="numerical_failure", error=str(exc))
        code = EXIT_NUMERICAL
    report["wall_time_s"] = time.perf_counter() - start
    text = serialize_report(report)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK:
        print(f"matmaj: {report['status']}: {report['error']}", file=sys.stderr)
    return code, report


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
