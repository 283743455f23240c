"""Command-line front end: ``berezin-kit <command> [flags]``.

Exit codes
----------
0  success
2  usage error (unknown flag, malformed value)
3  constraint violation (quantization constraint, finite-norm cutoff, domain)
4  numerical failure (quadrature, conditioning, pole proximity)
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import errors
from .coherent import coherent_state, resolution_of_identity_residual
from .duality import duality_report, parse_map
from .export import SCHEMA, dumps, fmt_complex, fmt_float, matrix_pairs
from .hilbert import dimension_report, gram_matrix, inner_product, make_spec, reproducing_kernel
from .phase_space import space_from_name
from .quadrature import validate_inv_hbar
from .semiclassical import SemiclassicalSweep, run_sweep

COMMANDS = ("gram", "kernel", "coherent", "resolution", "sweep", "duality", "dimension")
SPACES = ("plane", "sphere", "disc")
FORMATS = ("json", "csv")

# Documented example invocations (README, determinism checks).
EXAMPLES = (
    ("gram", "--space", "plane", "--inv-hbar", "1", "--max-degree", "3"),
    ("gram", "--space", "sphere", "--inv-hbar", "4", "--max-degree", "4"),
    ("kernel", "--space", "disc", "--inv-hbar", "4", "--label", "0.3,0.1", "--label", "0.2"),
    ("coherent", "--space", "plane", "--inv-hbar", "1", "--truncation", "10", "--label", "0.5", "--label", "0,1"),
    ("resolution", "--space", "disc", "--inv-hbar", "6", "--max-degree", "8"),
    ("sweep", "--space", "disc", "--inv-hbar-list", "4,8,16", "--pair", "0,0.5"),
    ("sweep", "--space", "sphere", "--inv-hbar-list", "4,8,16", "--pair", "0,1", "--format", "csv"),
    ("duality", "--space", "plane", "--map", "S", "--label", "0.5"),
    ("dimension", "--space", "sphere", "--inv-hbar", "4"),
)

# Top-level keys every JSON document of a command carries.
DOCUMENT_KEYS = {
    "gram": ("schema", "command", "space", "inv_hbar", "degrees", "diagonal", "entries"),
    "kernel": ("schema", "command", "space", "inv_hbar", "max_degree", "z", "w", "value"),
    "coherent": ("schema", "command", "space", "inv_hbar", "truncation", "states", "overlaps"),
    "resolution": ("schema", "command", "space", "inv_hbar", "max_degree", "residual"),
    "sweep": ("schema", "command", "space", "rows", "convergent"),
    "duality": ("schema", "map", "weight", "label", "residual", "baseline_residual", "classification"),
    "dimension": ("schema", "command", "space", "inv_hbar", "dimension"),
}


def check_document(command: str, doc: dict) -> None:
    """Raise ValueError if ``doc`` lacks the schema tag or a required key."""
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"schema tag must be {SCHEMA!r}")
    items = doc["reports"] if command == "duality" and "reports" in doc else [doc]
    for item in items:
        missing = [k for k in DOCUMENT_KEYS[command] if k not in item]
        if missing:
            raise ValueError(f"{command} document missing keys {missing}")


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONSTRAINT = 3
EXIT_NUMERICAL = 4

EXIT_CODES = {
    errors.ConstraintError: EXIT_CONSTRAINT,
    errors.FiniteNormError: EXIT_CONSTRAINT,
    errors.DomainError: EXIT_CONSTRAINT,
    errors.SpecMismatchError: EXIT_CONSTRAINT,
    errors.MetricError: EXIT_NUMERICAL,
    errors.QuadratureError: EXIT_NUMERICAL,
    errors.ToleranceUnreachable: EXIT_NUMERICAL,
    errors.DegenerateGramError: EXIT_NUMERICAL,
    errors.PoleProximityError: EXIT_NUMERICAL,
}


def exit_code_for(exc: BaseException) -> int:
    for cls in type(exc).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return EXIT_NUMERICAL


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    """'re,im' or 're'."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"complex value must be 're' or 're,im', got {text!r}")


def format_complex(z: complex) -> str:
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r},{z.imag!r}"


def parse_pair(text: str):
    """'u,v' (two reals) or 'ure,uim,vre,vim'."""
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) == 2:
        return complex(parts[0]), complex(parts[1])
    if len(parts) == 4:
        return complex(parts[0], parts[1]), complex(parts[2], parts[3])
    raise ValueError(f"pair must be 'u,v' or 'ure,uim,vre,vim', got {text!r}")


def format_pair(p) -> str:
    u, v = p
    if u.imag == 0 and v.imag == 0:
        return f"{u.real!r},{v.real!r}"
    return f"{u.real!r},{u.imag!r},{v.real!r},{v.imag!r}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    space: str = "plane"
    inv_hbar: Fraction = Fraction(1)
    max_degree: Optional[int] = None
    labels: tuple = ()
    inv_hbar_list: tuple = ()
    pairs: tuple = ()
    map: str = "S"
    weight: int = 0
    output_format: str = "json"
    output_path: Optional[str] = None
    tolerance: float = 1e-10

    def to_argv(self) -> list:
        argv = [self.command, "--space", self.space]
        if self.command == "sweep":
            argv += ["--inv-hbar-list", ",".join(str(x) for x in self.inv_hbar_list)]
            for p in self.pairs:
                argv += ["--pair", format_pair(p)]
        else:
            argv += ["--inv-hbar", str(self.inv_hbar)]
        if self.max_degree is not None:
            argv += ["--max-degree", str(self.max_degree)]
        for z in self.labels:
            argv += ["--label", format_complex(z)]
        if self.command == "duality":
            argv += ["--map", self.map, "--weight", str(self.weight)]
        argv += ["--format", self.output_format]
        if self.output_path is not None:
            argv += ["--output", self.output_path]
        argv += ["--tolerance", repr(self.tolerance)]
        return argv


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="berezin-kit", description="Berezin quantization experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--space", choices=SPACES, default="plane")
    p.add_argument("--inv-hbar", default=None, help="1/hbar as a rational, e.g. 4 or 1/2")
    p.add_argument("--inv-hbar-list", default=None, help="comma-separated increasing 1/hbar values (sweep)")
    p.add_argument("--max-degree", "--truncation", dest="max_degree", type=int, default=None)
    p.add_argument("--label", dest="labels", action="append", default=[], help="complex 're,im' or 're'")
    p.add_argument("--pair", dest="pairs", action="append", default=[], help="label pair 'u,v' (sweep)")
    p.add_argument("--map", default="S", help="S, I, T:b, D:lam or a,b,c,d (duality)")
    p.add_argument("--weight", type=int, default=0, help="pullback weight w (duality)")
    p.add_argument("--format", dest="output_format", choices=FORMATS, default="json")
    p.add_argument("--output", dest="output_path", default=None)
    p.add_argument("--tolerance", type=float, default=1e-10)
    return p


def parse_args(argv) -> ExperimentConfig:
    """Validate flags into a config.

    Raises UsageError for malformed input and ConstraintError for values
    that break a quantization constraint.
    """
    ns = _build_parser().parse_args(list(argv))
    try:
        labels = tuple(parse_complex(x) for x in ns.labels)
        pairs = tuple(parse_pair(x) for x in ns.pairs)
        inv = parse_rational(ns.inv_hbar) if ns.inv_hbar is not None else Fraction(1)
        inv_list = tuple(parse_rational(x) for x in ns.inv_hbar_list.split(",")) if ns.inv_hbar_list else ()
        parse_map(ns.map, ns.weight)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if ns.command == "sweep":
        if ns.inv_hbar is not None:
            raise UsageError("sweep takes --inv-hbar-list, not --inv-hbar")
        if len(inv_list) < 3 or any(b <= a for a, b in zip(inv_list, inv_list[1:])):
            raise UsageError("--inv-hbar-list needs at least three strictly increasing values")
        if not pairs:
            raise UsageError("sweep needs at least one --pair")
    elif ns.inv_hbar_list is not None or pairs:
        raise UsageError("--inv-hbar-list and --pair apply to sweep only")
    if ns.max_degree is not None and ns.max_degree < 0:
        raise UsageError("--max-degree must be >= 0")
    if not (1e-14 < ns.tolerance < 1e-2):
        raise UsageError("--tolerance must lie in (1e-14, 1e-2)")
    if ns.command in ("kernel",) and len(labels) != 2:
        raise UsageError("kernel needs exactly two --label values (z and w)")
    if ns.command in ("coherent", "duality") and not labels:
        raise UsageError(f"{ns.command} needs at least one --label")
    if ns.command == "duality" and ns.space != "plane":
        raise errors.ConstraintError("the duality experiment runs on the plane")
    if ns.command == "duality" and ns.weight < 0:
        raise UsageError("--weight must be >= 0")
    space = space_from_name(ns.space)
    for value in (inv_list or (inv,)):
        validate_inv_hbar(space, float(value))
    for z in labels:
        space.check_domain(z)
    for u, v in pairs:
        space.check_domain(u)
        space.check_domain(v)
    if ns.command != "duality":
        ns.map, ns.weight = "S", 0
    return ExperimentConfig(
        command=ns.command, space=ns.space, inv_hbar=inv, max_degree=ns.max_degree,
        labels=labels, inv_hbar_list=inv_list, pairs=pairs, map=ns.map, weight=ns.weight,
        output_format=ns.output_format, output_path=ns.output_path, tolerance=ns.tolerance,
    )


def _spec(cfg: ExperimentConfig, degree: int):
    return make_spec(space_from_name(cfg.space), float(cfg.inv_hbar), max_degree=degree, tolerance=cfg.tolerance)


def _header(cfg: ExperimentConfig) -> dict:
    return {"schema": SCHEMA, "command": cfg.command, "space": cfg.space, "inv_hbar": fmt_float(float(cfg.inv_hbar))}


def _default_degree(cfg, fallback):
    if cfg.max_degree is not None:
        return cfg.max_degree
    if cfg.space == "sphere":
        return int(cfg.inv_hbar)
    return fallback


def _run_gram(cfg):
    deg = _default_degree(cfg, 10)
    g = gram_matrix(_spec(cfg, deg), deg)
    doc = _header(cfg)
    doc["degrees"] = list(g.degrees)
    doc["diagonal"] = [fmt_float(x) for x in g.diagonal]
    doc["entries"] = g.to_document()["entries"]
    rows = [["m", "n", "re", "im"]] + [
        [m, n, *fmt_complex(g.entries[m, n])] for m in g.degrees for n in g.degrees
    ]
    return doc, rows


def _run_kernel(cfg):
    deg = _default_degree(cfg, 40)
    spec = _spec(cfg, deg)
    z, w = cfg.labels
    val = reproducing_kernel(spec, z, w, deg)
    doc = _header(cfg)
    doc.update({"max_degree": deg, "z": fmt_complex(z), "w": fmt_complex(w), "value": fmt_complex(val)})
    return doc, [["z", "w", "re", "im"], [format_complex(z), format_complex(w), *fmt_complex(val)]]


def _run_coherent(cfg):
    deg = _default_degree(cfg, 40)
    spec = _spec(cfg, deg)
    states = [coherent_state(spec, z, deg) for z in cfg.labels]
    ov = np.array([[inner_product(spec, a.vector, b.vector) for b in states] for a in states])
    doc = _header(cfg)
    doc["truncation"] = deg
    doc["states"] = [
        {"label": fmt_complex(s.label), "coefficients": [fmt_complex(c) for c in s.vector.coefficients]}
        for s in states
    ]
    doc["overlaps"] = matrix_pairs(ov)
    rows = [["label", "degree", "re", "im"]] + [
        [format_complex(s.label), m, *fmt_complex(c)] for s in states for m, c in enumerate(s.vector.coefficients)
    ]
    return doc, rows


def _run_resolution(cfg):
    deg = _default_degree(cfg, 10)
    res = resolution_of_identity_residual(_spec(cfg, deg), deg)
    doc = _header(cfg)
    doc.update({"max_degree": deg, "residual": fmt_float(res)})
    return doc, [["max_degree", "residual"], [deg, fmt_float(res)]]


def _run_sweep(cfg):
    sweep = SemiclassicalSweep(space_from_name(cfg.space), tuple(float(x) for x in cfg.inv_hbar_list), cfg.pairs)
    result = run_sweep(sweep)
    return result.to_json(), result.to_csv()


def _run_duality(cfg):
    deg = _default_degree(cfg, 40)
    m = parse_map(cfg.map, cfg.weight)
    spec = _spec(cfg, deg)
    reports = [duality_report(spec, m, z, deg) for z in cfg.labels]
    if len(reports) == 1:
        doc = reports[0]
    else:
        doc = {"schema": SCHEMA, "reports": reports}
    keys = ["label_re", "label_im", "weight", "residual", "baseline_residual", "classification"]
    rows = [keys] + [[*r["label"], r["weight"], r["residual"], r["baseline_residual"], r["classification"]]
                     for r in reports]
    return doc, rows


def _run_dimension(cfg):
    rep = dimension_report(_spec(cfg, 1))
    doc = _header(cfg)
    doc.update(rep)
    return doc, [list(rep.keys()), list(rep.values())]


_DISPATCH = {
    "gram": _run_gram,
    "kernel": _run_kernel,
    "coherent": _run_coherent,
    "resolution": _run_resolution,
    "sweep": _run_sweep,
    "duality": _run_duality,
    "dimension": _run_dimension,
}


def _render_csv(rows) -> str:
    if isinstance(rows, str):
        return rows
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def render(cfg: ExperimentConfig) -> str:
    """Run the experiment and return the emitted document as text."""
    doc, rows = _DISPATCH[cfg.command](cfg)
    return dumps(doc) if cfg.output_format == "json" else _render_csv(rows)


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text = render(cfg)
    except errors.BerezinError as exc:
        code = exit_code_for(exc)
        stderr.write(dumps({"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc), "exit_code": code}))
        return code
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        stderr.write(f"berezin-kit: usage error: {exc}\n")
        return EXIT_USAGE
    except errors.BerezinError as exc:
        code = exit_code_for(exc)
        stderr.write(f"berezin-kit: {type(exc).__name__}: {exc}\n")
        return code
    return run(cfg, stdout=stdout, stderr=stderr)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
