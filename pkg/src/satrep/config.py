"""Sectioned key-value scenario files.

Keys carry their unit as a suffix (``_km``, ``_deg``, ``_dbm``, ``_db``,
``_mhz``, ``_per_km2``). A value may repeat its unit after the number
(``altitude_km = 550 km``); any other unit is rejected. This is the only
place where dB, dBm, degrees, kilometres and per-km^2 appear: everything
handed to the model is SI, linear and in radians.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from satrep.channel import ChannelParams, db_to_linear, dbm_to_watt
from satrep.errors import ConfigError
from satrep.geometry import make_geometry
from satrep.link_analysis import LinkBudget
from satrep.montecarlo import SimConfig
from satrep.repetition import RepetitionPolicy
from satrep.scenario import Scenario, phi_max_for


def _finite(v):
    return math.isfinite(v)


# (section, key) -> (type, default, predicate, description of the invariant)
SCHEMA = {
    ("geometry", "earth_radius_km"): (float, 6371.0, lambda v: _finite(v) and v > 0, "> 0"),
    ("geometry", "altitude_km"): (float, 550.0, lambda v: _finite(v) and v > 0, "> 0"),
    ("channel", "beta"): (float, 0.3, lambda v: _finite(v) and v > 0, "> 0"),
    ("channel", "mu_los_db"): (float, 1.0, _finite, "finite"),
    ("channel", "sigma_los_db"): (float, 2.0, lambda v: _finite(v) and v >= 0, ">= 0"),
    ("channel", "mu_nlos_db"): (float, 20.0, _finite, "finite"),
    ("channel", "sigma_nlos_db"): (float, 8.0, lambda v: _finite(v) and v >= 0, ">= 0"),
    ("channel", "frequency_mhz"): (float, 2000.0, lambda v: _finite(v) and v > 0, "> 0"),
    ("repetition", "d0"): (float, 1e-6, lambda v: 0 < v <= 1, "in (0, 1]"),
    ("repetition", "a"): (float, 5e-5, lambda v: 0 <= v <= 1, "in [0, 1]"),
    ("repetition", "theta_min_deg"): (float, 10.0, lambda v: 0 <= v < 90, "in [0, 90)"),
    ("budget", "tx_power_dbm"): (float, 23.0, _finite, "finite"),
    ("budget", "noise_dbm"): (float, -138.0, _finite, "finite"),
    ("budget", "sinr_threshold_db"): (float, -10.0, _finite, "finite"),
    ("budget", "kappa"): (float, 1.0, lambda v: 0 < v <= 1, "in (0, 1]"),
    ("budget", "lambda0_per_km2"): (float, 0.05, lambda v: _finite(v) and v > 0, "> 0"),
    ("constellation", "k"): (int, 10, lambda v: v >= 1, ">= 1"),
    ("sim", "seed"): (int, 1, lambda v: 0 <= v < 2**64, "in [0, 2**64)"),
    ("sim", "realizations"): (int, 10_000, lambda v: v >= 1, ">= 1"),
    ("output", "directory"): (str, "out", lambda v: bool(v), "non-empty"),
    ("output", "format"): (str, "csv", lambda v: v in ("csv", "json"), "csv or json"),
}

SECTIONS = tuple(dict.fromkeys(s for s, _ in SCHEMA))

_UNIT_SUFFIXES = {"_km": "km", "_deg": "deg", "_dbm": "dBm", "_db": "dB", "_mhz": "MHz",
                  "_per_km2": "/km2"}
_VALUE_WITH_UNIT = re.compile(r"^\s*(?P<num>\S+)\s+(?P<unit>\S+)\s*$")


def _unit_of(key):
    for suffix, unit in _UNIT_SUFFIXES.items():
        if key.endswith(suffix):
            return unit
    return None


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated configuration values keyed by ``"section.key"``."""

    values: dict

    def __getitem__(self, dotted):
        return self.values[dotted]

    def get(self, section, key):
        return self.values[f"{section}.{key}"]

    def model_values(self) -> dict:
        """Everything except the ``output`` section (which cannot change results)."""
        return {k: v for k, v in self.values.items() if not k.startswith("output.")}

    def canonical_json(self) -> str:
        return json.dumps(self.model_values(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def scenario(self) -> Scenario:
        g = self.get
        try:
            geom = make_geometry(g("geometry", "earth_radius_km") * 1e3, g("geometry", "altitude_km") * 1e3)
        except ValueError as exc:
            raise ConfigError(str(exc), field="geometry") from exc
        try:
            channel = ChannelParams(
                beta=g("channel", "beta"),
                mu_los_db=g("channel", "mu_los_db"),
                sigma_los_db=g("channel", "sigma_los_db"),
                mu_nlos_db=g("channel", "mu_nlos_db"),
                sigma_nlos_db=g("channel", "sigma_nlos_db"),
                frequency_hz=g("channel", "frequency_mhz") * 1e6,
            )
        except ValueError as exc:
            raise ConfigError(str(exc), field="channel") from exc
        try:
            policy = RepetitionPolicy(
                d0=g("repetition", "d0"),
                a=g("repetition", "a"),
                phi_max_rad=phi_max_for(geom, math.radians(g("repetition", "theta_min_deg"))),
                lambda0=g("budget", "lambda0_per_km2") * 1e-6,
            )
        except ValueError as exc:
            raise ConfigError(str(exc), field="repetition") from exc
        try:
            budget = LinkBudget(
                tx_power_w=dbm_to_watt(g("budget", "tx_power_dbm")),
                noise_power_w=dbm_to_watt(g("budget", "noise_dbm")),
                sinr_threshold=db_to_linear(g("budget", "sinr_threshold_db")),
                kappa=g("budget", "kappa"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), field="budget") from exc
        return Scenario(geom, channel, policy, budget, g("constellation", "k"))

    def sim(self, n_realizations=None) -> SimConfig:
        return SimConfig(seed=self.get("sim", "seed"),
                         n_realizations=n_realizations or self.get("sim", "realizations"))

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        raw = {k: str(v) for k, v in self.values.items()}
        raw.update(overrides)
        return _validate(raw, {})


def _coerce(dotted, text, line=None):
    section, key = dotted.split(".", 1)
    typ, _, ok, rule = SCHEMA[(section, key)]
    text = text.strip()
    if typ is not str:
        m = _VALUE_WITH_UNIT.match(text)
        if m:
            expected = _unit_of(key)
            if expected is None or m["unit"].lower() != expected.lower():
                raise ConfigError(f"unit {m['unit']!r} not accepted (expected {expected or 'none'})",
                                  field=dotted, line=line)
            text = m["num"]
    try:
        if typ is int:
            try:
                value = int(text)
            except ValueError:
                f = float(text)
                if not f.is_integer():
                    raise
                value = int(f)
        elif typ is float:
            value = float(text)
        else:
            value = text
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as {typ.__name__}", field=dotted, line=line) from None
    if not ok(value):
        raise ConfigError(f"value {value!r} violates {rule}", field=dotted, line=line)
    return value


def _validate(raw: dict, lines: dict) -> ScenarioConfig:
    values = {}
    for (section, key), (_, default, _, _) in SCHEMA.items():
        dotted = f"{section}.{key}"
        values[dotted] = _coerce(dotted, raw[dotted], lines.get(dotted)) if dotted in raw else default
    unknown = sorted(set(raw) - set(values))
    if unknown:
        raise ConfigError("unknown key", field=unknown[0], line=lines.get(unknown[0]))
    if values["channel.mu_nlos_db"] < values["channel.mu_los_db"]:
        raise ConfigError("must be >= channel.mu_los_db", field="channel.mu_nlos_db",
                          line=lines.get("channel.mu_nlos_db"))
    cfg = ScenarioConfig(values)
    cfg.scenario()
    return cfg


def _key_lines(text):
    """Line number of each ``section.key`` assignment (1-based)."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
        elif section and s and s[0] not in "#;" and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            out[f"{section}.{key}"] = i
    return out


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", field=f"{exc.section}.{exc.option}", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=lineno) from None
    lines = _key_lines(text)
    raw = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError("unknown section", field=section)
        for key, value in parser.items(section):
            raw[f"{section}.{key}"] = value
    return _validate(raw, lines)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {str(path)!r}: {exc.strerror}") from None
    return parse_config(text)


def default_config() -> ScenarioConfig:
    return _validate({}, {})


def dump_config(cfg: ScenarioConfig) -> str:
    parts = []
    for section in SECTIONS:
        parts.append(f"[{section}]")
        for (sec, key) in SCHEMA:
            if sec == section:
                v = cfg.get(sec, key)
                parts.append(f"{key} = {repr(v) if isinstance(v, float) else v}")
        parts.append("")
    return "\n".join(parts)


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))


def parse_overrides(args) -> dict:
    """``--section.key=value`` tokens to a ``{"section.key": "value"}`` mapping."""
    out = {}
    for tok in args:
        m = re.fullmatch(r"--(\w+)\.(\w+)=(.*)", tok)
        if not m:
            raise ConfigError(f"unrecognised argument {tok!r} (expected --section.key=value)")
        dotted = f"{m[1]}.{m[2]}"
        if (m[1], m[2]) not in SCHEMA:
            raise ConfigError("unknown key", field=dotted)
        out[dotted] = m[3]
    return out
