"""Deterministic JSON/CSV rendering shared by the CLI and the export helpers."""

from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "berezin-kit/1"
SIG_DIGITS = 12


def fmt_float(x):
    """Round to 12 significant digits; shortest repr of the rounded value.

    Non-finite values become the strings "inf", "-inf", "nan" (JSON has no literal for them).
    """
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    y = float(f"{x:.{SIG_DIGITS}g}")
    return 0.0 if y == 0 else y


def fmt_complex(z):
    z = complex(z)
    return [fmt_float(z.real), fmt_float(z.imag)]


def fmt_complex_label(z) -> str:
    """'re,im' text form, the same syntax the CLI accepts."""
    re_, im_ = fmt_complex(z)
    return f"{re_!r},{im_!r}"


def matrix_pairs(m) -> list:
    return [[fmt_complex(x) for x in row] for row in np.asarray(m)]


def coefficient_document(space: str, inv_hbar: float, coefficients, **extra) -> dict:
    doc = {"schema": SCHEMA, "space": space, "inv_hbar": fmt_float(inv_hbar)}
    doc.update(extra)
    doc["coefficients"] = [fmt_complex(c) for c in np.asarray(coefficients)]
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
