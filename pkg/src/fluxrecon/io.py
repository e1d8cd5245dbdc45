"""Disk formats: JSON/CSV writers and recorded-profile directories."""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

import jsonschema

from .errors import ConfigError, ObservationInconsistencyError, ProfileGapError, ProfileParseError
from .profile import ObservedProfile
from .reconstruct import GridSpec

STEP_RE = re.compile(r"^step_(\d+)\.json$")
MANIFEST = "manifest.json"

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_ARR = {"type": "array", "items": _NUM}

PROFILE_SCHEMA = {
    "type": "object",
    "required": ["T", "segments"],
    "properties": {
        "T": {"type": "number", "exclusiveMinimum": 0},
        "segments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "object", "required": ["kind", "x_lo", "x_hi", "u", "v"],
                     "properties": {"kind": {"const": "constant"}, "x_lo": _NUM, "x_hi": _NUM,
                                    "u": _NUM, "v": _NUM}},
                    {"type": "object", "required": ["kind", "x", "u", "v"],
                     "properties": {"kind": {"const": "fan"}, "x": _ARR, "u": _ARR, "v": _ARR}},
                ]
            },
        },
    },
}

STEP_SCHEMA = {
    "type": "object",
    "required": ["h", "left", "right", "profile"],
    "properties": {"h": {"type": "integer", "minimum": 0}, "left": _PAIR, "right": _PAIR,
                   "profile": PROFILE_SCHEMA},
}


def dumps(obj) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_text(path, text):
    Path(path).write_text(text)


def grid_to_json(grid: GridSpec):
    return {"u_star": grid.u_star, "u_sup": grid.u_sup, "v_star": grid.v_star, "v_sup": grid.v_sup,
            "m": grid.m}


def save_profiles(directory, observer, grid: GridSpec, flux_name=""):
    """Observe every grid step and write one file per step plus a manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for h in range(grid.n):
        left, right = grid.node(h), grid.node(h + 1)
        p = observer.observe_step(h, left, right)
        write_json(d / f"step_{h:04d}.json",
                   {"h": h, "left": list(left), "right": list(right), "profile": p.to_json()})
    write_json(d / MANIFEST, {"grid": grid_to_json(grid), "T": observer.T, "flux": flux_name,
                              "steps": grid.n})


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProfileParseError(f"{path}: invalid JSON: {exc}") from exc


class ProfileDirectory:
    """Observation source reading ``step_NNNN.json`` files written by ``save_profiles``."""

    def __init__(self, directory):
        self.path = Path(directory)
        if not self.path.is_dir():
            raise ConfigError(f"profile directory {directory} does not exist", field="flux")
        self.files = {}
        for name in os.listdir(self.path):
            mt = STEP_RE.match(name)
            if mt:
                self.files[int(mt.group(1))] = self.path / name
        self.manifest = None
        if (self.path / MANIFEST).exists():
            self.manifest = _read_json(self.path / MANIFEST)
        n = self.manifest["steps"] if self.manifest else (max(self.files) + 1 if self.files else 1)
        for h in range(n):
            if h not in self.files:
                raise ProfileGapError(h)

    @property
    def grid(self):
        if not self.manifest:
            return None
        g = self.manifest["grid"]
        return GridSpec(g["u_star"], g["u_sup"], g["v_star"], g["v_sup"], g["m"])

    @property
    def T(self):
        return self.manifest["T"] if self.manifest else None

    def observe_step(self, h, left, right) -> ObservedProfile:
        if h not in self.files:
            raise ProfileGapError(h)
        obj = _read_json(self.files[h])
        try:
            jsonschema.validate(obj, STEP_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ProfileParseError(f"{self.files[h].name}: {exc.message}") from exc
        if obj["h"] != h:
            raise ProfileParseError(f"{self.files[h].name} records step {obj['h']}")
        for key, want in (("left", left), ("right", right)):
            got = obj[key]
            if abs(got[0] - want[0]) > 1e-12 or abs(got[1] - want[1]) > 1e-12:
                raise ObservationInconsistencyError(
                    f"step {h}: recorded {key} node {got} differs from grid node {list(want)}")
        return ObservedProfile.from_json(obj["profile"])


def load_profiles(directory) -> ProfileDirectory:
    return ProfileDirectory(directory)
