"""JSON and CSV formats for states, strategies, reports and sweeps."""

import csv
import io
import json
from pathlib import Path

import numpy as np

from .compiler import CompiledStrategy, StrategyBranch
from .errors import StateFormatError
from .states import NORM_TOL, BipartitePureState, from_schmidt


def matrix_to_json(mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def matrix_from_json(doc, field="matrix"):
    try:
        arr = np.asarray(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(field, f"not a numeric nested array ({exc})") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise StateFormatError(field, "expected rows of [re, im] pairs")
    out = np.empty(arr.shape[:2], dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def state_from_dict(doc, norm_tol=NORM_TOL):
    """Parse either ``{"dim_a", "dim_b", "amplitudes"}`` or the ``{"schmidt": [...]}`` shortcut."""
    if not isinstance(doc, dict):
        raise StateFormatError("<root>", "state document must be a JSON object")
    if "schmidt" in doc:
        lam = doc["schmidt"]
        if not isinstance(lam, list) or not lam or not all(isinstance(x, (int, float)) for x in lam):
            raise StateFormatError("schmidt", "expected a non-empty list of numbers")
        if any(x < 0 for x in lam):
            raise StateFormatError("schmidt", "coefficients must be nonnegative")
        if abs(sum(lam) - 1.0) > norm_tol:
            raise StateFormatError("schmidt", f"coefficients sum to {sum(lam)!r}, expected 1")
        return from_schmidt(lam, norm_tol=norm_tol)
    for key in ("dim_a", "dim_b", "amplitudes"):
        if key not in doc:
            raise StateFormatError(key, "missing")
    for key in ("dim_a", "dim_b"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool) or doc[key] < 1:
            raise StateFormatError(key, "must be a positive integer")
    amps = matrix_from_json(doc["amplitudes"], "amplitudes")
    if amps.shape != (doc["dim_a"], doc["dim_b"]):
        raise StateFormatError("amplitudes", f"shape {amps.shape} does not match dim_a x dim_b")
    norm2 = float(np.sum(np.abs(amps) ** 2))
    if abs(norm2 - 1.0) > norm_tol:
        raise StateFormatError("amplitudes", f"squared norm {norm2!r} deviates from 1")
    return BipartitePureState(amps, norm_tol)


def state_to_dict(state):
    return {"dim_a": state.dim_a, "dim_b": state.dim_b, "amplitudes": matrix_to_json(state.amplitudes)}


def load_json_arg(text):
    """Inline JSON, or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise StateFormatError("<json>", str(exc)) from None
    path = Path(text)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise StateFormatError("<path>", f"no such file: {text}") from None
    except json.JSONDecodeError as exc:
        raise StateFormatError("<json>", f"{text}: {exc}") from None


def strategy_to_dict(strategy):
    return {
        "m": strategy.m,
        "p_success": strategy.success_probability,
        "input_spectrum": [float(x) for x in strategy.input_spectrum],
        "basis_a": matrix_to_json(strategy.basis_a),
        "basis_b": matrix_to_json(strategy.basis_b),
        "branches": [
            {
                "label": b.label,
                "verdict": b.verdict,
                "probability": b.probability,
                "kraus": matrix_to_json(b.kraus),
                "u_a": matrix_to_json(b.u_a),
                "u_b": matrix_to_json(b.u_b),
                "weights": [float(x) for x in b.weights],
                "support": list(b.support),
            }
            for b in strategy.branches
        ],
    }


def strategy_from_dict(doc):
    try:
        lam = np.asarray(doc["input_spectrum"], float)
        basis_a = matrix_from_json(doc["basis_a"], "basis_a")
        basis_b = matrix_from_json(doc["basis_b"], "basis_b")
        branches = tuple(
            StrategyBranch(
                b["label"],
                b["verdict"],
                float(b["probability"]),
                matrix_from_json(b["kraus"], "kraus"),
                matrix_from_json(b["u_a"], "u_a"),
                matrix_from_json(b["u_b"], "u_b"),
                np.asarray(b.get("weights", []), float),
                tuple(b.get("support", ())),
            )
            for b in doc["branches"]
        )
        return CompiledStrategy(lam, int(doc["m"]), branches, float(doc["p_success"]), basis_a, basis_b)
    except KeyError as exc:
        raise StateFormatError(str(exc.args[0]), "missing from strategy document") from None


def dumps(doc):
    return json.dumps(doc, indent=2) + "\n"


def histogram_csv(histogram):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "count"])
    for label, count in histogram.items():
        w.writerow([label, count])
    return buf.getvalue()


def sweep_csv(points):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "K", "m", "p_max", "entropy"])
    for pt in points:
        w.writerow([pt.n, repr(pt.K), pt.m, repr(pt.p_max), repr(pt.entropy)])
    return buf.getvalue()
