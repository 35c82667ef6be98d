"""JSON configuration: schema, validation with field paths, and conversion to ScenarioConfig."""

from __future__ import annotations

import json

import jsonschema

from .baselines import SchemeId
from .channel import CeeNorm, GainModel, RadioParams, SPEED_OF_LIGHT
from .errors import ConfigError
from .sim import SWEEP_VARIABLES, ScenarioConfig, SweepSpec
from .sinr import NoiseModel, db_to_linear

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["seed", "trials", "schemes"],
    "properties": {
        "topology": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "num_tx": _COUNT,
                "num_rx": _COUNT,
                "num_irs": _COUNT,
                "irs_mx": _COUNT,
                "irs_my": _COUNT,
                "area_m": _POS,
                "irs_height_range_m": {"type": "array", "items": _NUM,
                                       "minItems": 2, "maxItems": 2},
                "tx_height_m": _NUM,
                "rx_height_m": _NUM,
                "far_field": {"type": "boolean"},
            },
        },
        "radio": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "carrier_frequency_hz": _POS,
                "absorption_per_m": {"type": "number", "minimum": 0},
                "tx_gain_dbi": _NUM,
                "rx_gain_dbi": _NUM,
                "element_side_wavelengths": _POS,
                "element_side_m": _POS,
                "element_efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "directivity_exponent": {"type": "number", "minimum": 0},
                "gain_model": {"enum": [g.value for g in GainModel]},
                "tx_power_dbm": {"oneOf": [_NUM, {"type": "array", "items": _NUM,
                                                  "minItems": 1}]},
                "reflecting_efficiency": {"type": "number", "exclusiveMinimum": 0,
                                          "maximum": 1},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n0_dbm_per_hz": _NUM,
                "bandwidth_hz": _POS,
                "noise_figure_db": _NUM,
            },
        },
        "csi": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "relative_error": {"type": "number", "minimum": 0},
                "variance_norm": {"enum": [c.value for c in CeeNorm]},
            },
        },
        "schemes": {"type": "array", "minItems": 1,
                    "items": {"enum": [s.value for s in SchemeId]}},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variable", "values"],
            "properties": {
                "variable": {"enum": list(SWEEP_VARIABLES)},
                "values": {"type": "array", "items": _NUM, "minItems": 1},
                "bandwidth_hz": {"type": "array", "items": _POS, "minItems": 1},
            },
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "trials": _COUNT,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "trials_csv": {"type": "string"},
                "sweep_csv": {"type": "string"},
                "manifest": {"type": "string"},
            },
        },
    },
}


def _error_path(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            return ".".join(filter(None, [path, missing[0]]))
    return path or "<root>"


def validate_document(doc: dict) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        path = _error_path(err)
        msg = err.message
        if err.validator == "enum" and path.endswith("variable"):
            msg = f"unknown sweep variable {err.instance!r}; supported: {', '.join(SWEEP_VARIABLES)}"
        raise ConfigError(msg, path)
    return doc


def load_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}", "<file>") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "<file>") from exc
    return validate_document(doc)


def scenario_config(doc: dict) -> ScenarioConfig:
    validate_document(doc)
    topo = doc.get("topology", {})
    rad = doc.get("radio", {})
    f = rad.get("carrier_frequency_hz", 300e9)
    if "element_side_m" in rad and "element_side_wavelengths" in rad:
        raise ConfigError("give element_side_m or element_side_wavelengths, not both",
                          "radio.element_side_m")
    side = rad.get("element_side_m", rad.get("element_side_wavelengths", 0.4) * SPEED_OF_LIGHT / f)
    try:
        radio = RadioParams(
            carrier_frequency=f,
            absorption=rad.get("absorption_per_m", 0.0033),
            tx_gain=float(db_to_linear(rad.get("tx_gain_dbi", 0.0))),
            rx_gain=float(db_to_linear(rad.get("rx_gain_dbi", 0.0))),
            element_side=side,
            element_efficiency=rad.get("element_efficiency", 1.0),
            directivity_exponent=rad.get("directivity_exponent", 2.0),
            gain_model=rad.get("gain_model", "trigonometric"),
        )
        nz = doc.get("noise", {})
        noise = NoiseModel(nz.get("n0_dbm_per_hz", -174.0), nz.get("bandwidth_hz", 10e9),
                           nz.get("noise_figure_db", 10.0))
    except ValueError as exc:
        raise ConfigError(str(exc), "radio") from exc
    csi = doc.get("csi", {})
    return ScenarioConfig(
        num_tx=topo.get("num_tx", 3),
        num_rx=topo.get("num_rx", 3),
        num_irs=topo.get("num_irs", 5),
        mx=topo.get("irs_mx", 100),
        my=topo.get("irs_my", 100),
        area_m=topo.get("area_m", 20.0),
        irs_height_range_m=tuple(topo.get("irs_height_range_m", (0.0, 5.0))),
        tx_height_m=topo.get("tx_height_m", 1.0),
        rx_height_m=topo.get("rx_height_m", 1.0),
        far_field=topo.get("far_field", False),
        radio=radio,
        noise=noise,
        tx_power_dbm=rad.get("tx_power_dbm", 25.0),
        csi_error=csi.get("relative_error", 0.1),
        cee_norm=csi.get("variance_norm", "transpose"),
        reflecting_efficiency=rad.get("reflecting_efficiency", 1.0),
        schemes=tuple(doc["schemes"]),
        seed=doc["seed"],
        trials=doc["trials"],
    )


def sweep_spec(doc: dict, base: ScenarioConfig = None) -> SweepSpec:
    if "sweep" not in doc:
        raise ConfigError("section is required for a sweep run", "sweep")
    sw = doc["sweep"]
    base = base or scenario_config(doc)
    bw = sw.get("bandwidth_hz")
    if bw is not None and sw["variable"] != "frequency":
        raise ConfigError("applies to frequency sweeps only",
                          "sweep.bandwidth_hz")
    return SweepSpec(sw["variable"], tuple(sw["values"]), base,
                     tuple(bw) if bw is not None else None)
