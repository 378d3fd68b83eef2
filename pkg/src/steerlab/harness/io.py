"""Loading and validating distribution and measurement files."""

from __future__ import annotations

import json
import numbers
from pathlib import Path

import numpy as np

from ..errors import DomainError, ParseError, ValidationError
from ..quantum import JointDistribution, MeasurementSet, POVMSet, projective_setting

NORMALISATION_TOL = 1e-6
NEGATIVE_TOL = 1e-12


def read_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if not text.strip():
        raise ParseError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from exc


def _pointer(*parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _int_field(doc, key, expected=None) -> int:
    if key not in doc:
        raise ParseError(f"missing field {key!r}", _pointer(key))
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{key!r} must be a positive integer", _pointer(key))
    if expected is not None and v != expected:
        raise ParseError(f"{key!r} must be {expected}", _pointer(key))
    return v


def _numeric_array(data, shape, path) -> np.ndarray:
    """Check a nested list against ``shape`` element by element, reporting the first mismatch."""
    if not shape:
        if isinstance(data, bool) or not isinstance(data, numbers.Real):
            raise ParseError("expected a number", _pointer(*path))
        if not np.isfinite(data):
            raise ParseError("number is not finite", _pointer(*path))
        return np.asarray(float(data))
    if not isinstance(data, list) or len(data) != shape[0]:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise ParseError(f"expected a list of length {shape[0]}, got {got}", _pointer(*path))
    return np.stack([_numeric_array(item, shape[1:], path + (i,)) for i, item in enumerate(data)])


def parse_distribution(doc) -> JointDistribution:
    """``{"n_x", "n_y", "n_a": 2, "n_b": 2, "p": [x][y][a][b]}``.

    Rows off by at most 1e-6 from unit sum are renormalised.
    """
    if not isinstance(doc, dict):
        raise ParseError("distribution document must be a JSON object")
    nx, ny = _int_field(doc, "n_x"), _int_field(doc, "n_y")
    na, nb = _int_field(doc, "n_a", 2), _int_field(doc, "n_b", 2)
    if "p" not in doc:
        raise ParseError("missing field 'p'", _pointer("p"))
    p = _numeric_array(doc["p"], (nx, ny, na, nb), ("p",))
    neg = np.argwhere(p < -NEGATIVE_TOL)
    if neg.size:
        raise ValidationError(f"negative probability {p[tuple(neg[0])]!r} at {_pointer('p', *neg[0])}")
    sums = p.sum(axis=(2, 3))
    for x, y in np.argwhere(np.abs(sums - 1.0) > NORMALISATION_TOL):
        raise ValidationError(f"p(.,.|x={x},y={y}) sums to {sums[x, y]!r}; normalisation is off by more than {NORMALISATION_TOL:g}")
    p = np.clip(p, 0.0, None)
    return JointDistribution(p / p.sum(axis=(2, 3), keepdims=True))


def parse_measurements(doc):
    """``{"bloch": [[x, y, z], ...]}`` or ``{"effects": [y][b][row][col] as [re, im]}``."""
    if not isinstance(doc, dict):
        raise ParseError("measurement document must be a JSON object")
    if ("bloch" in doc) == ("effects" in doc):
        raise ParseError("exactly one of 'bloch' or 'effects' is required")
    if "bloch" in doc:
        vecs = doc["bloch"]
        if not isinstance(vecs, list) or not vecs:
            raise ParseError("'bloch' must be a non-empty list", _pointer("bloch"))
        settings = []
        for i, v in enumerate(vecs):
            arr = _numeric_array(v, (3,), ("bloch", i))
            try:
                settings.append(projective_setting(arr))
            except DomainError as exc:
                raise ValidationError(f"{exc} at {_pointer('bloch', i)}") from exc
        return MeasurementSet(tuple(settings))
    eff = doc["effects"]
    if not isinstance(eff, list) or not eff:
        raise ParseError("'effects' must be a non-empty list", _pointer("effects"))
    nb = len(eff[0]) if isinstance(eff[0], list) else 0
    if nb < 1:
        raise ParseError("each setting needs a list of effects", _pointer("effects", 0))
    arr = _numeric_array(eff, (len(eff), nb, 2, 2, 2), ("effects",))
    effects = arr[..., 0] + 1j * arr[..., 1]
    for y, setting in enumerate(effects):
        for b, e in enumerate(setting):
            if np.max(np.abs(e - e.conj().T)) > 1e-9:
                raise ValidationError(f"effect at {_pointer('effects', y, b)} is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -1e-9:
                raise ValidationError(f"effect at {_pointer('effects', y, b)} is not positive semidefinite")
        if np.max(np.abs(setting.sum(axis=0) - np.eye(2))) > 1e-9:
            raise ValidationError(f"effects of setting {_pointer('effects', y)} do not sum to the identity")
    return POVMSet(effects)


def load_distribution(path) -> JointDistribution:
    return parse_distribution(read_json(path))


def load_measurements(path):
    return parse_measurements(read_json(path))


def distribution_document(dist: JointDistribution) -> dict:
    nx, ny, na, nb = dist.shape
    return {"n_x": nx, "n_y": ny, "n_a": na, "n_b": nb, "p": dist.p.tolist()}


def measurement_document(bob) -> dict:
    vecs = getattr(bob, "bloch_vectors", None)
    if vecs is not None:
        return {"bloch": np.asarray(vecs).tolist()}
    eff = np.asarray(bob.effects)
    return {"effects": np.stack([eff.real, eff.imag], axis=-1).tolist()}
