"""Reading and writing states, ensembles, isometries and reports.

Files are UTF-8 JSON. Complex numbers are ``[re, im]`` pairs and every real is
written with 17 significant digits, so a write/read cycle is bit-identical.

    {"kind": "pure", "dims": [2, 2, 2], "amps": [[re, im], ...]}
    {"kind": "density", "dims": [3, 3], "mat": [[[re, im], ...], ...]}
    {"kind": "ensemble", "dims": [...], "members": [{"p": ..., "factors": [[[re, im], ...], ...]}, ...]}
    {"kind": "isometry", "shape": [rows, cols], "mat": [[[re, im], ...], ...]}
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, MultisepError
from .purification import Ensemble
from .states import DensityMatrix, PureState


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    # keep integral values recognizable as reals
    if not any(c in s for c in ".eEn"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int | None = None, _level: int = 0) -> str:
    """JSON text with 17-significant-digit reals; dict order is preserved."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        # short numeric rows stay on one line
        flat = all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj)
        if flat or indent is None:
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[" + sep.join(pad + dumps(v, indent, _level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cvec(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def _parse_cvec(data: Any, what: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: expected a list of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError(f"{what}: expected a list of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _parse_cmat(data: Any, what: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise FormatError(f"{what}: expected a nonempty list of rows")
    rows = [_parse_cvec(r, f"{what} row {i}") for i, r in enumerate(data)]
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{what}: rows have different lengths")
    return np.stack(rows)


def to_record(obj: PureState | DensityMatrix | Ensemble | np.ndarray) -> dict:
    if isinstance(obj, PureState):
        return {"kind": "pure", "dims": list(obj.dims), "amps": _cvec(obj.amps)}
    if isinstance(obj, DensityMatrix):
        return {"kind": "density", "dims": list(obj.dims), "mat": [_cvec(r) for r in obj.mat]}
    if isinstance(obj, Ensemble):
        members = [{"p": m.p, "factors": [_cvec(f) for f in m.factors]} for m in obj.members]
        return {"kind": "ensemble", "dims": list(obj.dims), "members": members}
    if isinstance(obj, np.ndarray) and obj.ndim == 2:
        return {"kind": "isometry", "shape": list(obj.shape), "mat": [_cvec(r) for r in obj]}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dims(rec: dict) -> tuple[int, ...]:
    dims = rec.get("dims")
    if not isinstance(dims, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
        raise FormatError("'dims' must be a list of integers")
    return tuple(dims)


def from_record(rec: Any) -> PureState | DensityMatrix | Ensemble | np.ndarray:
    """Inverse of :func:`to_record`; validation errors surface as library errors."""
    if not isinstance(rec, dict) or "kind" not in rec:
        raise FormatError("expected an object with a 'kind' field")
    kind = rec["kind"]
    try:
        if kind == "pure":
            return PureState(_dims(rec), _parse_cvec(rec["amps"], "amps"))
        if kind == "density":
            return DensityMatrix(_dims(rec), _parse_cmat(rec["mat"], "mat"))
        if kind == "ensemble":
            members = rec["members"]
            if not isinstance(members, list):
                raise FormatError("'members' must be a list")
            probs = [float(m["p"]) for m in members]
            factors = [[_parse_cvec(f, f"member {i} factor") for f in m["factors"]] for i, m in enumerate(members)]
            return Ensemble.from_terms(_dims(rec), probs, factors)
        if kind == "isometry":
            mat = _parse_cmat(rec["mat"], "mat")
            if list(mat.shape) != list(rec.get("shape", mat.shape)):
                raise FormatError(f"isometry shape {rec['shape']} does not match data {list(mat.shape)}")
            return mat
    except KeyError as exc:
        raise FormatError(f"{kind} record is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MultisepError):
            raise
        raise FormatError(f"malformed {kind} record: {exc}") from exc
    raise FormatError(f"unknown kind {kind!r}")


def dump_text(obj) -> str:
    return dumps(to_record(obj)) + "\n"


def save(obj, path: str | Path) -> None:
    Path(path).write_text(dump_text(obj), encoding="utf-8")


def loads(text: str):
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    return from_record(rec)


def load(path: str | Path):
    """Read a state, ensemble or isometry file. Raises ``FileNotFoundError`` or
    :class:`FormatError`."""
    return loads(Path(path).read_text(encoding="utf-8"))


def load_report(path: str | Path) -> dict:
    """Parse a machine report written by ``multisep report``."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
