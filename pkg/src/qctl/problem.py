"""JSON problem/controller files.

A problem file::

    {
      "schema_version": "1",
      "plant": {"n_x": 2, "n_w": 2, "n_u": 2, "n_y": 2,
                "A": [[...]], "B1": [[...]], "B2": [[...]], "C": [[...]]},
      "coupling": {"Rc": [[...]]},
      "specs": {"regulator": {"poles": [-1, [-0.5, 0.2], [-0.5, -0.2]],
                              "region": {"r_max": 0.1, "alpha_min": 0.05, "theta_max_deg": 60}},
                "observer": {...}},
      "structured_gain": {"H_scalar": true, "G1_scalar": true, "h": 0.5, "g1": 1.0},
      "xi_v": [[...]],
      "simulate": {"x0": [...], "t_final": 200, "dt": 0.05}
    }

Only ``schema_version`` and ``plant`` are mandatory.  Poles are real numbers
or ``[re, im]`` pairs; region angles are in degrees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .placement import PoleRegion, PoleSpec
from .qsde import DirectCoupling, ObserverController, QuadraturePlant
from .synthesis import StructuredGain

SCHEMA_VERSIONS = ("1",)


class ProblemFileError(ValueError):
    pass


@dataclass
class SimulationSettings:
    x0: np.ndarray
    t_final: float
    dt: float | None = None


@dataclass
class ProblemFile:
    schema_version: str
    plant: QuadraturePlant
    coupling: DirectCoupling
    regulator_spec: PoleSpec
    observer_spec: PoleSpec
    structured_gain: StructuredGain | None = None
    xi_v: np.ndarray | None = None
    simulate: SimulationSettings | None = None


def _matrix(obj, name, rows, cols):
    try:
        a = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"{name}: not a numeric matrix ({exc})") from None
    if rows * cols == 0 and a.size == 0:
        return np.zeros((rows, cols))
    if a.ndim != 2:
        raise ProblemFileError(f"{name}: expected a rectangular nested array, got ndim={a.ndim}")
    if a.shape != (rows, cols):
        raise ProblemFileError(f"{name}: shape {a.shape} does not match declared ({rows}, {cols})")
    if not np.all(np.isfinite(a)):
        raise ProblemFileError(f"{name}: non-finite entries")
    return a


def _dim(d, key):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 2 or v % 2:
        raise ProblemFileError(f"plant.{key} must be an even integer >= 2, got {v!r}")
    return v


def _pole(p):
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        return complex(p)
    if isinstance(p, (list, tuple)) and len(p) == 2 and all(isinstance(v, (int, float)) for v in p):
        return complex(p[0], p[1])
    raise ProblemFileError(f"pole {p!r}: expected a number or [re, im]")


def _spec(d, name, n_x) -> PoleSpec:
    if d is None:
        return PoleSpec()
    if not isinstance(d, dict):
        raise ProblemFileError(f"specs.{name} must be an object")
    poles = tuple(_pole(p) for p in d.get("poles", []))
    if poles and len(poles) != n_x:
        raise ProblemFileError(f"specs.{name}.poles: need {n_x} poles, got {len(poles)}")
    region = None
    if d.get("region") is not None:
        r = d["region"]
        try:
            region = PoleRegion.from_degrees(r["r_max"], r["alpha_min"], r["theta_max_deg"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemFileError(f"specs.{name}.region: {exc}") from None
    try:
        return PoleSpec(poles, region)
    except ValueError as exc:
        raise ProblemFileError(f"specs.{name}: {exc}") from None


def parse_problem(doc: dict) -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object")
    version = str(doc.get("schema_version", ""))
    if version not in SCHEMA_VERSIONS:
        raise ProblemFileError(f"unrecognised schema_version {version!r}")
    pd = doc.get("plant")
    if not isinstance(pd, dict):
        raise ProblemFileError("missing 'plant' object")
    n_x, n_w, n_u, n_y = (_dim(pd, k) for k in ("n_x", "n_w", "n_u", "n_y"))
    if n_y != n_w:
        raise ProblemFileError(f"n_y ({n_y}) must equal n_w ({n_w})")
    plant = QuadraturePlant(
        _matrix(pd.get("A"), "plant.A", n_x, n_x),
        _matrix(pd.get("B1"), "plant.B1", n_x, n_w),
        _matrix(pd.get("B2"), "plant.B2", n_x, n_u),
        _matrix(pd.get("C"), "plant.C", n_y, n_x),
    )
    cd = doc.get("coupling") or {}
    Rc = DirectCoupling(_matrix(cd["Rc"], "coupling.Rc", n_x, n_x)) if "Rc" in cd else DirectCoupling.zero(n_x)
    specs = doc.get("specs") or {}
    sg = None
    if doc.get("structured_gain") is not None:
        s = doc["structured_gain"]
        sg = StructuredGain(
            H_scalar=bool(s.get("H_scalar", False)),
            G1_scalar=bool(s.get("G1_scalar", False)),
            h=None if s.get("h") is None else float(s["h"]),
            g1=None if s.get("g1") is None else float(s["g1"]),
            bounds=tuple(float(v) for v in s.get("bounds", (-10.0, 10.0))),
        )
    xi = None
    if doc.get("xi_v") is not None:
        xi = _matrix(doc["xi_v"], "xi_v", n_x, n_x)
        if not np.allclose(xi, xi.T, rtol=0, atol=1e-14):
            raise ProblemFileError("xi_v must be symmetric")
    sim = None
    if doc.get("simulate") is not None:
        sd = doc["simulate"]
        try:
            x0 = np.array(sd["x0"], dtype=float).ravel()
            t_final = float(sd["t_final"])
            dt = None if sd.get("dt") is None else float(sd["dt"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemFileError(f"simulate: {exc}") from None
        if x0.size not in (n_x, 2 * n_x):
            raise ProblemFileError(f"simulate.x0 must have length {n_x} or {2 * n_x}")
        if t_final < 0 or (dt is not None and dt <= 0):
            raise ProblemFileError("simulate: need t_final >= 0 and dt > 0")
        sim = SimulationSettings(x0, t_final, dt)
    return ProblemFile(version, plant, Rc, _spec(specs.get("regulator"), "regulator", n_x),
                       _spec(specs.get("observer"), "observer", n_x), sg, xi, sim)


def load_problem(path) -> ProblemFile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemFileError(f"{path}: {exc}") from None
    return parse_problem(doc)


def controller_to_dict(ctrl: ObserverController, psd_shift: float = 0.0, xi_v=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSIONS[-1],
        "n_x": ctrl.n_x, "n_y": ctrl.n_y, "n_z": ctrl.n_z, "n_v": ctrl.n_v,
        "F": ctrl.F.tolist(), "G1": ctrl.G1.tolist(), "G2": ctrl.G2.tolist(),
        "G3": ctrl.G3.tolist(), "H": ctrl.H.tolist(),
        "xi_shift": psd_shift,
        "xi_v": None if xi_v is None else np.asarray(xi_v).tolist(),
    }


def load_controller(path) -> ObserverController:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        n_x, n_y, n_z, n_v = (int(d[k]) for k in ("n_x", "n_y", "n_z", "n_v"))
        G3 = np.array(d["G3"], dtype=float).reshape(n_x, n_v)
        return ObserverController(
            _matrix(d["F"], "F", n_x, n_x), _matrix(d["G1"], "G1", n_x, n_y),
            _matrix(d["G2"], "G2", n_x, n_z), G3, _matrix(d["H"], "H", n_z, n_x))
    except ProblemFileError:
        raise
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError(f"{path}: bad controller file ({exc})") from None
