"""hbar-scaled coherent-state overlaps and their behaviour as 1/hbar grows.

The localization rate ``-hbar log |<u|v>|^2`` is the diagnostic: it is
computed from kernels alone and tends to a classical quantity as 1/hbar
grows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import BerezinError, QuadratureError
from .export import SCHEMA, fmt_complex, fmt_complex_label, fmt_float
from .hilbert import InnerProductSpec, make_spec
from .phase_space import PhaseSpace
from .quadrature import model_log_moments

__all__ = [
    "SemiclassicalSweep",
    "SweepResult",
    "SweepError",
    "scaled_log_overlap",
    "kernel_truncation",
    "run_sweep",
    "is_convergent",
    "CONVERGENCE_FLOOR",
]

CONVERGENCE_FLOOR = 1e-12
_TAIL = 1e-18
_MAX_TRUNCATION = 8192


class SweepError(QuadratureError):
    """A sweep row failed; carries the offending (inv_hbar, pair)."""

    def __init__(self, inv_hbar, pair, cause):
        self.inv_hbar = inv_hbar
        self.pair = pair
        super().__init__(f"sweep row inv_hbar={inv_hbar:g}, pair={pair}: {cause}")


def _log_terms(spec: InnerProductSpec, x: complex, degree: int):
    """log of |x|^m / G_mm for m = 0..degree (terms of K evaluated at |x|)."""
    log_g = model_log_moments(spec.space, spec.inv_hbar, degree, spec.tolerance)
    with np.errstate(divide="ignore"):
        return np.arange(degree + 1) * math.log(abs(x)) - log_g if x != 0 else np.where(
            np.arange(degree + 1) == 0, -log_g[0], -np.inf)


def kernel_truncation(spec: InnerProductSpec, labels, tail: float = _TAIL) -> int:
    """Smallest truncation whose dropped kernel terms are below ``tail`` (relative).

    Full space on the sphere; doubling search elsewhere.
    """
    if spec.cutoff is not None:
        return spec.cutoff
    r2 = max((abs(complex(z)) ** 2 for z in labels), default=0.0)
    degree = 40
    while degree <= _MAX_TRUNCATION:
        lt = _log_terms(spec, r2, 2 * degree)
        total = special.logsumexp(lt[: degree + 1])
        rest = special.logsumexp(lt[degree + 1:])
        if rest - total < math.log(tail):
            return degree
        degree *= 2
    raise QuadratureError(f"kernel tail does not fall below {tail:g} within degree {_MAX_TRUNCATION}")


def _log_kernel(spec, z, w, degree):
    """log |K(z, w)| for a rotation-invariant spec, summed in log space."""
    x = complex(z) * np.conj(complex(w))
    lt = _log_terms(spec, abs(x), degree)
    phase = np.exp(1j * np.arange(degree + 1) * np.angle(x))
    shift = np.max(lt)
    val = np.sum(np.exp(lt - shift) * phase)
    return shift + math.log(abs(val)) if abs(val) > 0 else -math.inf


def scaled_log_overlap(spec: InnerProductSpec, u, v, truncation: int = None) -> float:
    """-(1/inv_hbar) log |<u|v>|^2; ``inf`` when the overlap underflows."""
    u = complex(spec.space.check_domain(u))
    v = complex(spec.space.check_domain(v))
    if u == v:
        return 0.0
    d = kernel_truncation(spec, (u, v)) if truncation is None else int(truncation)
    log_uv = _log_kernel(spec, u, v, d)
    if log_uv == -math.inf:
        return math.inf
    log_sq = 2.0 * log_uv - _log_kernel(spec, u, u, d) - _log_kernel(spec, v, v, d)
    return max(-log_sq / spec.inv_hbar, 0.0)


@dataclass(frozen=True)
class SemiclassicalSweep:
    space: PhaseSpace
    inv_hbar_sequence: tuple
    probe_labels: tuple

    def __post_init__(self):
        seq = tuple(float(x) for x in self.inv_hbar_sequence)
        if len(seq) < 3:
            raise ValueError("a sweep needs at least three values of inv_hbar")
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError("inv_hbar_sequence must be strictly increasing")
        pairs = tuple((complex(u), complex(v)) for u, v in self.probe_labels)
        if not pairs:
            raise ValueError("at least one probe pair is required")
        object.__setattr__(self, "inv_hbar_sequence", seq)
        object.__setattr__(self, "probe_labels", pairs)


@dataclass(frozen=True)
class SweepResult:
    sweep: SemiclassicalSweep
    rows: tuple = field(repr=False)
    convergent: tuple

    def column(self, pair_index: int) -> list:
        return [r["scaled_log_overlap"] for r in self.rows if r["pair_index"] == pair_index]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["space", "inv_hbar", "u", "v", "scaled_log_overlap", "diff_to_previous"])
        for r in self.rows:
            writer.writerow([
                r["space"], fmt_float(r["inv_hbar"]), fmt_complex_label(r["u"]), fmt_complex_label(r["v"]),
                fmt_float(r["scaled_log_overlap"]),
                "" if r["diff_to_previous"] is None else fmt_float(r["diff_to_previous"]),
            ])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": "sweep",
            "space": self.sweep.space.name,
            "rows": [
                {
                    "space": r["space"],
                    "inv_hbar": fmt_float(r["inv_hbar"]),
                    "u": fmt_complex(r["u"]),
                    "v": fmt_complex(r["v"]),
                    "scaled_log_overlap": fmt_float(r["scaled_log_overlap"]),
                    "diff_to_previous": None if r["diff_to_previous"] is None else fmt_float(r["diff_to_previous"]),
                }
                for r in self.rows
            ],
            "convergent": list(self.convergent),
        }


def is_convergent(values, floor: float = CONVERGENCE_FLOOR) -> bool:
    """Successive differences shrink monotonically, or the sequence is constant.

    Differences below ``floor`` count as zero.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size < 3 or not np.all(np.isfinite(vals)):
        return False
    d = np.abs(np.diff(vals))
    d[d <= floor] = 0.0
    if not np.any(d):
        return True
    return all(b < a or b == 0.0 for a, b in zip(d, d[1:]))


def run_sweep(sweep: SemiclassicalSweep) -> SweepResult:
    """Evaluate every (inv_hbar, pair) row; rows ordered by inv_hbar, then pair."""
    table = {}
    for s in sweep.inv_hbar_sequence:
        try:
            spec = make_spec(sweep.space, s, max_degree=1)
        except BerezinError as exc:
            raise SweepError(s, None, exc) from exc
        for k, (u, v) in enumerate(sweep.probe_labels):
            try:
                table[s, k] = scaled_log_overlap(spec, u, v)
            except BerezinError as exc:
                raise SweepError(s, (u, v), exc) from exc
    rows = []
    for s_idx, s in enumerate(sweep.inv_hbar_sequence):
        for k, (u, v) in enumerate(sweep.probe_labels):
            val = table[s, k]
            prev = None if s_idx == 0 else val - table[sweep.inv_hbar_sequence[s_idx - 1], k]
            rows.append({
                "space": sweep.space.name, "inv_hbar": s, "pair_index": k,
                "u": u, "v": v, "scaled_log_overlap": val, "diff_to_previous": prev,
            })
    conv = tuple(
        is_convergent([table[s, k] for s in sweep.inv_hbar_sequence])
        for k in range(len(sweep.probe_labels))
    )
    return SweepResult(sweep, tuple(rows), conv)
