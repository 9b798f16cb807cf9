"""JSON encodings for matrices, channels, observables and operator spaces."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .opalg import as_cmat


def cmat_to_json(m) -> dict:
    m = as_cmat(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def cmat_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise ValueError(f"CMat record declares {rows}x{cols} but has {len(data)} entries")
    arr = np.array([complex(re, im) for re, im in data], dtype=complex).reshape(rows, cols)
    return as_cmat(arr)


def channel_to_json(ch) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [cmat_to_json(k) for k in ch.kraus]}


def channel_from_json(obj: dict):
    from .channel import make_channel

    ch = make_channel([cmat_from_json(k) for k in obj["kraus"]])
    if (ch.dim_in, ch.dim_out) != (obj.get("dim_in", ch.dim_in), obj.get("dim_out", ch.dim_out)):
        raise ValueError("declared channel dimensions do not match the Kraus operators")
    return ch


def positive_basis_to_json(basis) -> dict:
    return {"ops": [cmat_to_json(a) for a in basis.ops]}


def positive_basis_from_json(obj: dict, require_independent: bool = True):
    from .channel import validate_positive_basis

    return validate_positive_basis([cmat_from_json(a) for a in obj["ops"]],
                                   require_independent=require_independent)


def observable_to_json(obs) -> dict:
    return {"dim": obs.dim, "effects": [cmat_to_json(e) for e in obs.effects]}


def observable_from_json(obj: dict):
    from .povm import make_observable

    obs = make_observable([cmat_from_json(e) for e in obj["effects"]])
    if obs.dim != obj.get("dim", obs.dim):
        raise ValueError("declared observable dimension does not match its effects")
    return obs


def generators_to_json(mats) -> dict:
    mats = [as_cmat(m) for m in mats]
    return {"dim": mats[0].shape[0], "generators": [cmat_to_json(m) for m in mats]}


def space_from_json(obj: dict):
    """Operator space from a generator file, a positive basis, a channel or an observable."""
    from .channel import ncgraph
    from .opalg import span

    if "generators" in obj:
        return span([cmat_from_json(m) for m in obj["generators"]])
    if "ops" in obj:
        return span([cmat_from_json(m) for m in obj["ops"]])
    if "effects" in obj:
        return span([cmat_from_json(m) for m in obj["effects"]])
    if "kraus" in obj:
        return ncgraph(channel_from_json(obj))
    raise ValueError("unrecognized operator-space file")


def dumps(obj, pretty: bool = False) -> str:
    return json.dumps(obj, indent=2 if pretty else None, sort_keys=False, allow_nan=False) + "\n"


def write_json(obj, path: str | Path | None, pretty: bool = False) -> str:
    text = dumps(obj, pretty)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
