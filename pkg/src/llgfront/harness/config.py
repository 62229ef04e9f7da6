"""INI-style experiment configuration validated against :data:`SCHEMA`.

Every tunable of a run lives here so that the manifest records all of it.
Keys are addressed as ``section.key``; command-line overrides use the same
names.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from ..geometry import ModelParams


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _pos_int(v):
    return v >= 1


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _words(text):
    if isinstance(text, (list, tuple)):
        return tuple(str(v) for v in text)
    return tuple(v for v in str(text).replace(",", " ").split() if v)


COMPONENTS = ("f_w", "f_theta", "f_eta", "f_phi", "f_psi", "s_theta", "s_eta", "s_psi")
ANALYSES = ("pvariation", "moments", "mle", "beta", "poisson")

# section -> key -> (parser, default, check or None, constraint text)
SCHEMA: dict[str, dict[str, tuple]] = {
    "experiment": {
        "name": (str, "run", None, ""),
        "seed": (int, 0, _nonneg, "seed >= 0"),
        "workers": (int, 1, _pos_int, "workers >= 1"),
        "format": (str, "csv", lambda v: v in ("csv", "binary"), "csv or binary"),
    },
    "model": {
        "lam": (float, 1.0, _positive, "lambda > 0"),
        "sigma": (float, 0.3, _nonneg, "sigma >= 0"),
        "g": (_floats, (1.0, 1.0, 1.0), lambda v: len(v) == 3, "three components"),
        "L": (float, 100.0, _positive, "L > 0"),
        "nx": (int, 1001, lambda v: v >= 3, "nx >= 3"),
        "dt": (float, 1e-3, _positive, "dt > 0"),
    },
    "spde": {
        "T": (float, 10.0, _positive, "T > 0"),
        "snapshot_stride": (int, 100, _pos_int, "stride >= 1"),
        "n_runs": (int, 1, _pos_int, "n_runs >= 1"),
        "width": (float, 1.0, _positive, "width > 0"),
    },
    "cc": {
        "T": (float, 100.0, _positive, "T > 0"),
        "dt": (float, 1e-4, _positive, "dt > 0"),
        "thin": (int, 100, _pos_int, "thin >= 1"),
        "n_trajectories": (int, 1, _pos_int, "n_trajectories >= 1"),
        "w0": (float, 1.0, _positive, "w0 > 0"),
        "theta0": (float, 0.0, None, ""),
        "eta0": (float, 0.0, lambda v: abs(v) < 1.5707963, "|eta0| < pi/2"),
        "phi0": (float, 0.0, None, ""),
        "psi0": (float, 0.0, None, ""),
        "w_threshold": (float, 1.5, _positive, "w_threshold > 0"),
    },
    "fit": {
        "max_iter": (int, 200, _pos_int, "max_iter >= 1"),
        "tol": (float, 1e-10, _positive, "tol > 0"),
    },
    "analyze": {
        "tests": (_words, ANALYSES, lambda v: set(v) <= set(ANALYSES), "subset of " + ",".join(ANALYSES)),
        "t_start": (float, 0.0, _nonneg, "t_start >= 0"),
        "n_segments": (int, 625, lambda v: v >= 2, "n_segments >= 2"),
        "segment_len": (int, 320, lambda v: v >= 2, "segment_len >= 2"),
        "p_grid": (_floats, tuple(round(2.0 + 0.1 * k, 1) for k in range(21)),
                   lambda v: len(v) >= 1 and min(v) > 0, "positive exponents"),
        "q_grid": (_floats, (0.25, 0.5, 0.75), lambda v: len(v) >= 1 and 0 < min(v) and max(v) <= 1,
                   "orders in (0, 1]"),
        "moment_window": (_floats, (), lambda v: len(v) in (0, 2), "empty or two times"),
        "tail_source": (str, "f_phi", lambda v: v in ("f_phi", "increments"), "f_phi or increments"),
        "n_bootstrap": (int, 200, _pos_int, "n_bootstrap >= 1"),
        "w_threshold": (float, 1.5, _positive, "w_threshold > 0"),
    },
    "verify": {
        "n_states": (int, 200, _pos_int, "n_states >= 1"),
        "tolerance": (float, 1e-6, _positive, "tolerance > 0"),
        "perturb": (float, 0.0, None, "relative perturbation of one closed-form coefficient"),
        "perturb_component": (str, "f_w", lambda v: v in COMPONENTS, "one of " + ",".join(COMPONENTS)),
    },
}


@dataclass(frozen=True)
class Config:
    values: dict  # section -> key -> parsed value

    def __getitem__(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    def section(self, name: str) -> dict:
        return dict(self.values[name])

    def model_params(self, dt: float | None = None) -> ModelParams:
        m = self.values["model"]
        return ModelParams(lam=m["lam"], sigma=m["sigma"], g=m["g"], L=m["L"], nx=m["nx"],
                           dt=m["dt"] if dt is None else dt, seed=self["experiment.seed"])

    def to_dict(self) -> dict:
        return {s: {k: list(v) if isinstance(v, tuple) else v for k, v in kv.items()}
                for s, kv in self.values.items()}


def _parse(section: str, key: str, raw):
    if section not in SCHEMA:
        raise ConfigError(section, "unknown section")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{section}.{key}", "unknown key")
    parser, _, check, text = SCHEMA[section][key]
    name = f"{section}.{key}"
    try:
        if parser is int:
            f = float(raw)
            if f != int(f):
                raise ValueError
            value = int(f)
        elif parser is str:
            value = str(raw).strip()
        else:
            value = parser(raw)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot parse {raw!r} as {getattr(parser, '__name__', 'value')}") from None
    if check is not None and not check(value):
        raise ConfigError(name, f"constraint violated ({text}), got {raw!r}")
    return value


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    """Defaults, then the file, then ``overrides`` (``{"section.key": value}``).

    ``path`` may also be a run manifest (JSON), whose recorded configuration
    is replayed.
    """
    values = {s: {k: entry[1] for k, entry in keys.items()} for s, keys in SCHEMA.items()}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError("config", f"file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON: {exc}") from None
            data = data.get("config", data)
            for section, kv in data.items():
                for key, raw in kv.items():
                    values.setdefault(section, {})
                    values[section][key] = _parse(section, key, raw)
        else:
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                parser.read_string(text, source=str(path))
            except configparser.Error as exc:
                raise ConfigError("config", str(exc)) from None
            for section in parser.sections():
                for key, raw in parser.items(section):
                    values.setdefault(section, {})
                    values[section][key] = _parse(section, key, raw)
    for dotted, raw in (overrides or {}).items():
        if raw is None:
            continue
        if "." not in dotted:
            raise ConfigError(dotted, "override keys must be section.key")
        section, key = dotted.split(".", 1)
        values[section][key] = _parse(section, key, raw)
    cfg = Config(values)
    cfg.model_params()  # cross-field validation of the physical parameters
    return cfg


def schema_document() -> dict:
    """The schema as plain data (published with ``llgfront schema``)."""
    return {s: {k: {"type": getattr(entry[0], "__name__", "value").lstrip("_"),
                    "default": list(entry[1]) if isinstance(entry[1], tuple) else entry[1],
                    "constraint": entry[3]} for k, entry in keys.items()}
            for s, keys in SCHEMA.items()}
