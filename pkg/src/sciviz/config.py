"""INI configuration shared by the command line and the acceptance suite.

A config file has one section per component; every key maps onto one
constructor parameter of :class:`~sciviz.ConvNetClassifier` or
:class:`~sciviz.SaliencyClassImpressions` (or a metrics/CLI setting)::

    [synthesizer]
    iterations_pre = 200
    step_px = 8

    [tv]
    lambda1 = auto

Values are parsed by the key's type; ``none`` and ``auto`` are accepted
where the parameter allows them. Unknown sections or keys raise
:class:`~sciviz.exceptions.ConfigError`.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .exceptions import ConfigError


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(parse):
    def inner(text):
        return None if text.strip().lower() == "none" else parse(text)
    inner.__name__ = f"optional {parse.__name__}"
    return inner


def _or_auto(parse):
    def inner(text):
        return "auto" if text.strip().lower() == "auto" else parse(text)
    inner.__name__ = f"{parse.__name__} or auto"
    return inner


def _fuse_radius(text):
    low = text.strip().lower()
    if low in ("half_gap", "none"):
        return None if low == "none" else "half_gap"
    return float(text)


@dataclass(frozen=True)
class Key:
    target: str  # "classifier", "synth", "metrics" or "cli"
    param: str
    parse: object


SCHEMA: dict[str, dict[str, Key]] = {
    "classifier": {
        "epochs": Key("classifier", "epochs", int),
        "batch_size": Key("classifier", "batch_size", int),
        "step_size": Key("classifier", "step_size", float),
        "random_state": Key("classifier", "random_state", int),
    },
    "image": {
        "init": Key("synth", "init", str),
        "constant_value": Key("synth", "constant_value", float),
        "noise_amplitude": Key("synth", "noise_amplitude", float),
    },
    "tv": {
        "lambda1": Key("synth", "tv_lambda1", _or_auto(float)),
        "period_k": Key("synth", "tv_period_k", int),
        "ratio": Key("synth", "tv_ratio", float),
    },
    "saliency": {
        "c2": Key("synth", "c2", float),
        "ramp_t": Key("synth", "ramp_t", _optional(int)),
        "accumulation_mode": Key("synth", "accumulation_mode", str),
        "sign_mode": Key("synth", "lr_sign_mode", str),
    },
    "region": {
        "r0": Key("synth", "r0", float),
        "r_max": Key("synth", "r_max", _optional(float)),
        "ramp_iters": Key("synth", "radius_ramp_iters", _optional(int)),
        "selection_radius": Key("synth", "selection_radius", _optional(float)),
    },
    "transforms": {
        "rotation_deg": Key("synth", "rotation_deg", float),
        "scale_min": Key("synth", "scale_min", float),
        "scale_max": Key("synth", "scale_max", float),
        "crop_pad": Key("synth", "crop_pad", _optional(int)),
        "jitter": Key("synth", "jitter", float),
        "apply_probability": Key("synth", "transform_probability", float),
        "pre": Key("synth", "transforms_pre", _bool),
        "post": Key("synth", "transforms_post", _bool),
    },
    "synthesizer": {
        "iterations_pre": Key("synth", "iterations_pre", int),
        "iterations_post": Key("synth", "iterations_post", int),
        "base_step": Key("synth", "base_step", _or_auto(float)),
        "step_px": Key("synth", "step_px", float),
        "post_init": Key("synth", "post_init", str),
        "fuse_blocks": Key("synth", "fuse_blocks", int),
        "fuse_block_a": Key("synth", "fuse_block_a", _optional(int)),
        "fuse_block_b": Key("synth", "fuse_block_b", _optional(int)),
        "fuse_radius": Key("synth", "fuse_radius", _fuse_radius),
    },
    "metrics": {
        "percentile": Key("metrics", "percentile", float),
        "connectivity": Key("metrics", "connectivity", int),
    },
    "cli": {
        "workers": Key("cli", "workers", int),
    },
}

# Settings for 28-32 px inputs and a few hundred iterations. Differences from
# the estimator defaults: shorter runs, a noise-free mean canvas, a larger
# first step, and no random transforms (they compound into blur and drift
# on canvases this small).
DESK_PRESET = {
    "synthesizer": {"iterations_pre": "200", "iterations_post": "200", "step_px": "8"},
    "image": {"noise_amplitude": "0"},
    "transforms": {"pre": "false", "post": "false"},
}

METRICS_DEFAULTS = {"percentile": 90.0, "connectivity": 8}
CLI_DEFAULTS = {"workers": 1}


def _check_known(section: str, key: str | None = None) -> Key | None:
    if section not in SCHEMA:
        raise ConfigError(f"unknown config section [{section}]")
    if key is None:
        return None
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown config key '{section}.{key}'")
    return SCHEMA[section][key]


class Config:
    """Raw string settings keyed by ``(section, key)``, later layers winning."""

    def __init__(self, values: dict | None = None):
        self._raw: dict[tuple[str, str], str] = {}
        for section, keys in (values or {}).items():
            for key, value in keys.items():
                self.set(section, key, value)

    @classmethod
    def preset(cls, name: str = "desk") -> "Config":
        if name == "desk":
            return cls(DESK_PRESET)
        if name == "reference":
            return cls()
        raise ConfigError(f"unknown preset {name!r} (choose desk or reference)")

    def set(self, section: str, key: str, value) -> None:
        entry = _check_known(section, key)
        text = str(value)
        try:
            entry.parse(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for '{section}.{key}': {text!r} ({exc})") from exc
        self._raw[(section, key)] = text

    def set_path(self, path: str, value) -> None:
        section, _, key = path.partition(".")
        if not key:
            raise ConfigError(f"config path must look like section.key, got {path!r}")
        self.set(section, key, value)

    def update_from_text(self, text: str, source: str = "<string>") -> "Config":
        parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__",
                                           inline_comment_prefixes=(";",))
        parser.optionxform = str
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        for section in parser.sections():
            _check_known(section)
            for key, value in parser.items(section):
                self.set(section, key, value)
        return self

    def update_from_file(self, path) -> "Config":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        return self.update_from_text(text, source=str(path))

    def params(self, target: str) -> dict:
        """Parsed constructor keyword arguments for one target."""
        out = {}
        for (section, key), text in self._raw.items():
            entry = SCHEMA[section][key]
            if entry.target == target:
                out[entry.param] = entry.parse(text)
        if target == "metrics":
            return {**METRICS_DEFAULTS, **out}
        if target == "cli":
            return {**CLI_DEFAULTS, **out}
        return out

    def to_ini(self) -> str:
        """Explicit settings as INI text, sections and keys in schema order."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section, keys in SCHEMA.items():
            present = {k: self._raw[(section, k)] for k in keys if (section, k) in self._raw}
            if present:
                parser[section] = present
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def __eq__(self, other):
        return isinstance(other, Config) and self._raw == other._raw


def load_config(path=None, preset: str = "desk", overrides=None) -> Config:
    """Preset, then file, then ``overrides`` (``{"section.key": value}``)."""
    cfg = Config.preset(preset)
    if path is not None:
        cfg.update_from_file(path)
    for dotted, value in (overrides or {}).items():
        cfg.set_path(dotted, value)
    return cfg


__all__ = ["Config", "SCHEMA", "DESK_PRESET", "load_config"]
