"""Model checkpoints as JSON.

The envelope carries the format version, the model spec and the CCA
constants of every block as plain decimal lists (Python's shortest
round-trip float repr, so they reload exactly). Network parameters are
stored as base64 strings of little-endian float64 bytes.
"""

import base64
import json

import numpy as np

from .cca import CcaResult
from .errors import CheckpointError, InvalidInputError
from .model import build_ccdnn

FORMAT = "ccguide-checkpoint"
VERSION = 1


def _encode(arr):
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(text, size, name):
    try:
        raw = base64.b64decode(text.encode("ascii"), validate=True)
    except (ValueError, AttributeError) as exc:
        raise CheckpointError(f"bad version/format: parameters of {name} are not base64") from exc
    if len(raw) != 8 * size:
        raise CheckpointError(
            f"bad version/format: {name} holds {len(raw) // 8} parameters, expected {size}"
        )
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)


def _cca_to_dict(c):
    return {
        "j": c.j.tolist(), "el": c.el.tolist(), "sigma": c.sigma.tolist(),
        "rho": c.rho.tolist(), "kappa": int(c.kappa),
        "mean_u": c.mean_u.tolist(), "mean_v": c.mean_v.tolist(), "reg": float(c.reg),
    }


def _cca_from_dict(d):
    arr = lambda key: np.asarray(d[key], dtype=np.float64)  # noqa: E731
    rho = arr("rho")
    return CcaResult(
        j=arr("j"), el=arr("el"), sigma=arr("sigma"), rho=rho.reshape(-1),
        kappa=int(d["kappa"]), mean_u=arr("mean_u"), mean_v=arr("mean_v"),
        reg=float(d["reg"]),
    )


def to_dict(model, seed=None, epochs=None, extra=None):
    """Checkpoint envelope for ``model`` as a JSON-ready dict."""
    return {
        "format": FORMAT,
        "version": VERSION,
        "task": model.task,
        "label": model.label,
        "spec": model.spec,
        "networks": {name: _encode(net.params) for name, net in model.networks()},
        "cca": [_cca_to_dict(blk.cca) for blk in model.blocks],
        "seed": seed,
        "epochs": epochs,
        "extra": extra or {},
    }


def from_dict(doc):
    """Rebuild a model from :func:`to_dict` output. Returns ``(model, doc)``."""
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError("bad version/format: not a ccguide checkpoint")
    if doc.get("version") != VERSION:
        raise CheckpointError(
            f"bad version/format: checkpoint version {doc.get('version')!r}, expected {VERSION}"
        )
    try:
        spec = dict(doc["spec"])
        task = spec.pop("task")
        model = build_ccdnn(task, **spec)
        nets = doc["networks"]
        for name, net in model.networks():
            net.set_params(_decode(nets[name], net.parameter_count, name))
        blocks = doc["cca"]
        if len(blocks) != len(model.blocks):
            raise CheckpointError("bad version/format: block count does not match spec")
        for blk, c in zip(model.blocks, blocks):
            blk.set_cca(_cca_from_dict(c))
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError, InvalidInputError) as exc:
        raise CheckpointError(f"bad version/format: {exc}") from exc
    return model, doc


def save(model, path, seed=None, epochs=None, extra=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(model, seed, epochs, extra), fh, indent=1)
        fh.write("\n")


def load(path):
    """Read a checkpoint file. Returns ``(model, envelope)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise CheckpointError(f"no such checkpoint: {path}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"bad version/format: {path} is not valid JSON ({exc})") from exc
    return from_dict(doc)
