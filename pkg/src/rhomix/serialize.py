"""JSON and CSV wire formats.

Complex scalars are ``[re, im]`` pairs, matrices are lists of rows, vectors
are plain number lists. Floats are written with 17 significant digits so the
output is byte-stable and round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .ensembles import ConstructionOutcome, DensityMatrix, PureEnsemble
from .errors import ValidationError


class SchemaError(ValidationError):
    pass


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise SchemaError(f"cannot encode non-finite number {x!r} in JSON")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text; nested numeric lists stay on one line."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(x, indent, _level + 1) for x in obj) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = " " * (indent * (_level + 1))
        items = [
            f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * _level) + "}"
    raise SchemaError(f"cannot encode {type(obj).__name__}")


def load_json(source: str):
    """Parse inline JSON text, ``-`` (stdin) or a file path."""
    text = source
    stripped = source.lstrip()
    if not stripped.startswith(("{", "[")):
        if source == "-":
            import sys

            text = sys.stdin.read()
        else:
            path = Path(source)
            if not path.is_file():
                raise SchemaError(f"no such input file: {source}")
            text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_matrix_to_json(m) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def states_to_json(states) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(states)]


def _parse_number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {x!r}")
    return float(x)


def parse_complex(x, where: str = "value") -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise SchemaError(f"{where}: complex scalar must be [re, im]")
        return complex(_parse_number(x[0], where), _parse_number(x[1], where))
    return complex(_parse_number(x, where))


def parse_vector(obj, name: str = "vector") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{name}: expected a non-empty array of numbers")
    return np.array([_parse_number(x, name) for x in obj], dtype=float)


def parse_real_matrix(obj, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{name}: expected an array of row arrays")
    rows = [parse_vector(r, name) for r in obj]
    if len({r.size for r in rows}) != 1:
        raise SchemaError(f"{name}: rows have unequal lengths")
    return np.array(rows)


def parse_complex_matrix(obj, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{name}: expected an array of row arrays")
    rows = [[parse_complex(z, name) for z in row] for row in obj]
    if len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{name}: rows have unequal lengths")
    return np.array(rows, dtype=complex)


def _require_keys(obj, required: set[str], optional: set[str], name: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{name}: expected a JSON object")
    missing = required - obj.keys()
    if missing:
        raise SchemaError(f"{name}: missing keys {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise SchemaError(f"{name}: unknown keys {sorted(unknown)}")


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "matrix": complex_matrix_to_json(rho.matrix)}


def parse_density(obj) -> DensityMatrix:
    _require_keys(obj, {"dim", "matrix"}, set(), "density matrix")
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaError("density matrix: 'dim' must be a positive integer")
    m = parse_complex_matrix(obj["matrix"], "density matrix")
    if m.shape != (dim, dim):
        raise SchemaError(f"density matrix: 'dim' is {dim} but matrix has shape {m.shape}")
    return DensityMatrix(m)


def ensemble_to_json(e: PureEnsemble) -> dict:
    return {"weights": e.weights.tolist(), "states": states_to_json(e.states)}


def parse_ensemble(obj) -> PureEnsemble:
    _require_keys(obj, {"weights", "states"}, set(), "ensemble")
    weights = parse_vector(obj["weights"], "weights")
    states = parse_complex_matrix(obj["states"], "states")
    return PureEnsemble(weights, states)


def outcome_to_json(o: ConstructionOutcome, algorithm: str) -> dict:
    out = {
        "algorithm": algorithm,
        "ensemble": ensemble_to_json(o.ensemble),
        "bistochastic": o.bistochastic_used.tolist(),
        "unitary": complex_matrix_to_json(o.unitary_used),
        "degenerate": bool(o.degenerate),
        "residual": o.residual,
        "min_pair_gap": o.min_pair_gap if math.isfinite(o.min_pair_gap) else None,
    }
    if o.certificate is not None:
        out["certificate"] = {"verdict": o.certificate.verdict, "residual": o.certificate.residual}
    if o.sweeps:
        out["sweeps"] = o.sweeps
    return out


OUTCOME_KEYS = {"algorithm", "ensemble", "bistochastic", "unitary", "degenerate", "residual", "min_pair_gap"}


def parse_outcome(obj) -> dict:
    """Validate an outcome document; returns its parts as library objects."""
    _require_keys(obj, OUTCOME_KEYS, {"certificate", "sweeps"}, "outcome")
    if not isinstance(obj["degenerate"], bool):
        raise SchemaError("outcome: 'degenerate' must be a boolean")
    return {
        "algorithm": obj["algorithm"],
        "ensemble": parse_ensemble(obj["ensemble"]),
        "bistochastic": parse_real_matrix(obj["bistochastic"], "bistochastic"),
        "unitary": parse_complex_matrix(obj["unitary"], "unitary"),
        "degenerate": obj["degenerate"],
        "residual": _parse_number(obj["residual"], "residual"),
    }


def csv_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else fmt_float(v) if math.isfinite(v) else repr(v)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(csv_cell(x) for x in value) + "]"
    return str(value)


def write_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow([csv_cell(v) for v in row])
    return buf.getvalue()
