"""Experiment configuration: INI files, presets and flag overrides.

All keys live in one flat namespace; sections in the file are only for
readability.  A ``[manifest]`` section (as written next to run outputs)
is ignored on load, so a manifest can be fed back in as a config.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .analysis import beta_policy, optimize_beta
from .concentration import (FAMILIES, ConcentrationFactor, classical_factor, custom_factor,
                            noise_adapted_factor, regularized_factor, truncated_factor)
from .detector import ThresholdPolicy
from .spectral_core import SignalSpec, cos_term, merge_coefficients, sin_term


class ConfigError(ValueError):
    pass


SMOOTH_DEMO = "cos1:1.0, sin2:0.5"

CATALOG = {
    "sawtooth": ("0:1", "zero"),
    "two_jumps": ("-pi/2:1, pi/2:-0.5", "zero"),
    "smooth_sawtooth": ("0:1", SMOOTH_DEMO),
    "smooth": ("", SMOOTH_DEMO),
    "custom": ("", "zero"),
}

PRESETS = {
    # noiseless input, factor tuned to eta, equal weights (beta = 1)
    "fig1": dict(signal="sawtooth", N="1000", eta="1e-3", noise_eta="0",
                 factor="noise_adapted", beta="1"),
    "fig2": dict(signal="sawtooth", N="1000", eta="1e-4", factor="noise_adapted",
                 beta="auto", window_eps="1"),
    "fig3-case1": dict(signal="smooth_sawtooth", N="2000", eta="2e-5",
                       factor="truncated_optimal", beta="auto", k0="8*pi", N0="1000",
                       window_eps="1"),
    "fig3-case2": dict(signal="smooth_sawtooth", N="2000", eta="4.5e-5",
                       factor="truncated_optimal", beta="auto", k0="6*pi", N0="1000",
                       window_eps="1"),
}

PRESET_NOTES = {
    "fig1": "N = 1000 is a fixed choice for this preset",
    "fig2": "canonical unit sawtooth at x = 0 chosen as the noisy saw-tooth input",
    "fig3-case1": "smooth part cos x + 0.5 sin 2x is a fixed choice for this preset",
    "fig3-case2": "smooth part cos x + 0.5 sin 2x is a fixed choice for this preset",
}

_NUMBER = re.compile(r"^[0-9eE.+\-*/() ]*(pi)?[0-9eE.+\-*/() ]*$")


def parse_number(text) -> float:
    """Float, optionally written with ``pi`` (e.g. ``8*pi``, ``-pi/2``)."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    try:
        return float(s)
    except ValueError:
        pass
    if not s or not _NUMBER.match(s):
        raise ConfigError(f"not a number: {text!r}")
    try:
        value = eval(s, {"__builtins__": {}}, {"pi": math.pi})  # noqa: S307 - charset checked
    except Exception as exc:
        raise ConfigError(f"not a number: {text!r}") from exc
    return float(value)


def parse_jumps(text: str) -> list[tuple[float, float]]:
    out = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        loc, sep, amp = item.rpartition(":")
        if not sep:
            raise ConfigError(f"jump {item!r} is not of the form location:amplitude")
        out.append((parse_number(loc), parse_number(amp)))
    return out


def parse_smooth(text: str) -> dict[int, complex]:
    """Terms like ``cos1:1.0, sin2:0.5, const:0.2, c3:0.1+0.2j``."""
    if text.strip() in ("", "zero"):
        return {}
    parts = []
    for item in (p.strip() for p in text.split(",")):
        name, sep, value = item.partition(":")
        m = re.fullmatch(r"(cos|sin|c|const)(\d*)", name.strip())
        if not sep or not m:
            raise ConfigError(f"smooth term {item!r} not understood")
        kind, k = m.group(1), int(m.group(2) or 0)
        if kind == "const":
            parts.append({0: complex(parse_number(value))})
        elif kind == "cos":
            parts.append(cos_term(k, parse_number(value)))
        elif kind == "sin":
            parts.append(sin_term(k, parse_number(value)))
        else:
            c = complex(value.replace(" ", ""))
            parts.append({k: c, -k: c.conjugate()} if k else {0: complex(c.real)})
    return merge_coefficients(*parts)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _int(text) -> int:
    value = parse_number(text)
    if value != int(value):
        raise ConfigError(f"not an integer: {text!r}")
    return int(value)


def _opt(conv):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return conv(text)
    return parse


@dataclass
class ExperimentConfig:
    signal: str = "sawtooth"
    jumps: str | None = None
    smooth: str | None = None
    N: int = 128
    eta: float = 0.0
    noise_eta: float | None = None
    seed: int = 0
    factor: str = "classical_linear"
    beta: str = "auto"
    k0: float = 0.0
    N0: int | None = None
    epsilon_reg: float = 0.01
    table: str | None = None
    normalize: bool = True
    grid_size: int | None = None
    c_abs: float = 5.0
    c_rel: float = 0.3
    floor_cap: float = 0.5
    window_eps: float = 0.0
    refine: bool = False
    trials: int = 100
    output: str = "out"
    preset: str | None = None

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = {}
        for key, text in raw.items():
            if text is None:
                continue
            try:
                values[key] = _CONVERTERS[key](text)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        cfg = cls(**values)
        cfg.validate()
        return cfg

    @property
    def input_noise(self) -> float:
        return self.eta if self.noise_eta is None else self.noise_eta

    def validate(self) -> None:
        if self.signal not in CATALOG:
            raise ConfigError(f"signal must be one of {sorted(CATALOG)}, got {self.signal!r}")
        if self.N < 2:
            raise ConfigError("N must be >= 2")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ConfigError("eta must be >= 0")
        if not (self.input_noise >= 0 and math.isfinite(self.input_noise)):
            raise ConfigError("noise_eta must be >= 0")
        if self.factor not in FAMILIES:
            raise ConfigError(f"factor must be one of {list(FAMILIES)}, got {self.factor!r}")
        if self.factor in ("noise_adapted", "truncated_optimal", "regularized_optimal"):
            if self.eta <= 0:
                raise ConfigError(f"factor {self.factor} requires eta > 0")
            if self.beta not in ("auto", "optimize"):
                b = parse_number(self.beta)
                if not b > 0:
                    raise ConfigError("beta must be > 0")
            elif self.beta == "auto" and not self.eta < 1:
                raise ConfigError("beta = auto requires eta < 1")
        if self.factor in ("truncated_optimal", "regularized_optimal"):
            N0 = self.N if self.N0 is None else self.N0
            if self.factor == "regularized_optimal" and N0 != self.N:
                raise ConfigError("regularized_optimal uses N0 = N")
            if not 0 < N0 <= self.N:
                raise ConfigError(f"N0 must satisfy 0 < N0 <= N, got N0={N0}, N={self.N}")
            if not 0 <= self.k0 < N0:
                raise ConfigError(f"k0 must satisfy 0 <= k0 < N0, got k0={self.k0}, N0={N0}")
        if self.factor == "regularized_optimal" and not self.epsilon_reg > 0:
            raise ConfigError("epsilon_reg must be > 0")
        if self.factor == "custom_table" and not self.table:
            raise ConfigError("factor custom_table requires table = <path>")
        if self.grid_size is not None and self.grid_size < 2 * self.N:
            raise ConfigError(f"grid_size must be >= 2N = {2 * self.N} (spacing <= pi/N)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for name in ("c_abs", "c_rel", "floor_cap", "window_eps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def signal_spec(self) -> SignalSpec:
        jumps_text, smooth_text = CATALOG[self.signal]
        jumps = parse_jumps(self.jumps if self.jumps is not None else jumps_text)
        smooth = parse_smooth(self.smooth if self.smooth is not None else smooth_text)
        try:
            return SignalSpec(jumps, smooth)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_beta(self) -> float | None:
        if self.factor in ("classical_linear", "custom_table"):
            return None
        if self.beta == "auto":
            return beta_policy(self.eta)
        if self.beta == "optimize":
            return optimize_beta(self.eta, N=self.N)
        return parse_number(self.beta)

    def build_factor(self, N: int | None = None) -> ConcentrationFactor:
        N = self.N if N is None else N
        beta = self.resolved_beta()
        if self.factor == "classical_linear":
            return classical_factor(N)
        if self.factor == "noise_adapted":
            return noise_adapted_factor(self.eta, beta, N)
        if self.factor == "truncated_optimal":
            return truncated_factor(self.eta, beta, self.k0, self.N0 or N, N)
        if self.factor == "regularized_optimal":
            return regularized_factor(self.eta, beta, self.k0, N, self.epsilon_reg)
        from .tables import Table
        values = Table.read(self.table).array()[:, -1]
        if values.size != N:
            raise ConfigError(f"table has {values.size} entries but N = {N}")
        return custom_factor(values, self.normalize)

    def policy(self) -> ThresholdPolicy:
        return ThresholdPolicy(self.c_abs, self.c_rel, self.floor_cap, self.window_eps,
                               self.refine)

    def to_mapping(self) -> dict[str, str]:
        out = {}
        for key, value in asdict(self).items():
            if value is None:
                continue
            out[key] = repr(value) if isinstance(value, float) else str(value)
        return out


_CONVERTERS = {
    "signal": str, "jumps": str, "smooth": str, "N": _int, "eta": parse_number,
    "noise_eta": _opt(parse_number), "seed": _int, "factor": str,
    "beta": lambda t: t if str(t).strip() in ("auto", "optimize") else repr(parse_number(t)),
    "k0": parse_number, "N0": _opt(_int), "epsilon_reg": parse_number, "table": _opt(str),
    "normalize": _bool, "grid_size": _opt(_int), "c_abs": parse_number,
    "c_rel": parse_number, "floor_cap": parse_number, "window_eps": parse_number,
    "refine": _bool, "trials": _int, "output": str, "preset": _opt(str),
}


def read_config_file(path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__",
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}".replace("\n", " ")) from exc
    raw: dict[str, str] = {}
    for section in parser.sections():
        if section == "manifest":
            continue
        for key, value in parser.items(section):
            if key in raw:
                raise ConfigError(f"key {key!r} given twice in {path}")
            raw[key] = value
    return raw


def resolve_config(file: str | None = None, preset: str | None = None,
                   overrides: dict | None = None) -> ExperimentConfig:
    """Merge preset < config file < command-line overrides."""
    raw: dict = {}
    from_file = read_config_file(file) if file else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    name = overrides.get("preset") or preset or from_file.get("preset")
    if name:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        raw.update(PRESETS[name])
        raw["preset"] = name
    raw.update(from_file)
    raw.update(overrides)
    return ExperimentConfig.from_mapping(raw)


def write_manifest(path, cfg: ExperimentConfig, extra: dict) -> Path:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser["experiment"] = cfg.to_mapping()
    parser["manifest"] = {k: repr(v) if isinstance(v, float) else str(v)
                          for k, v in extra.items()}
    path = Path(path)
    with path.open("w") as fh:
        parser.write(fh)
    return path
