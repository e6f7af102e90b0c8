"""YAML run configuration with strict key checking."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .compiler import LayoutParams
from .core import ModeVector
from .errors import ConfigError
from .kernel import CALIBRATED_JITTER_SIGMA, EnsembleModel

SCENARIOS = ("qubit_usd", "qutrit_usd", "custom_unitary", "von_neumann")
DEFAULT_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, float(np.pi / 4))

TOP_KEYS = {"scenario", "alpha", "alphas", "states", "symmetric_overlap", "priors", "matrix",
            "matrix_file", "model", "layout", "analysis", "seed", "trials", "jitter", "out",
            "kernel", "tolerances"}
ANALYSIS_KEYS = {"window_half_width", "background_offset"}
TOLERANCE_KEYS = {"p_e_usd", "p_q_usd", "p_e_vn"}


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    alpha: float = float(np.arccos(np.sqrt(2.0 / 3.0)))
    alphas: tuple = DEFAULT_ALPHAS
    states: tuple | None = None
    priors: tuple | None = None
    matrix: np.ndarray | None = None
    model: EnsembleModel = EnsembleModel()
    layout: LayoutParams = LayoutParams()
    window_half_width: float = 15.0
    background_offset: float = 0.0
    seed: int = 0
    trials: int = 1000
    out: str = "out"
    kernel: str = "abstract"
    tolerances: dict = field(default_factory=lambda: {"p_e_usd": 1e-9, "p_q_usd": 1e-6, "p_e_vn": 1e-4})
    source: str = "<defaults>"

    def with_overrides(self, seed=None, trials=None, jitter=None, out=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = dataclasses.replace(cfg, seed=int(seed))
        if trials is not None:
            if trials < 1:
                raise ConfigError("--trials must be >= 1")
            cfg = dataclasses.replace(cfg, trials=int(trials))
        if jitter is not None:
            cfg = dataclasses.replace(cfg, model=dataclasses.replace(cfg.model, phase_jitter_sigma=_jitter(jitter, "--jitter")))
        if out is not None:
            cfg = dataclasses.replace(cfg, out=str(out))
        return cfg


def _jitter(value, where):
    if value == "calibrated":
        return CALIBRATED_JITTER_SIGMA
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number or 'calibrated', got {value!r}") from None
    if v < 0:
        raise ConfigError(f"{where}: must be >= 0")
    return v


def _key_lines(node, prefix=""):
    """Map dotted key paths to 1-based line numbers."""
    out = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}{k.value}"
            out[path] = k.start_mark.line + 1
            out.update(_key_lines(v, path + "."))
    return out


def _complex(x, where):
    try:
        return complex(x.replace(" ", "")) if isinstance(x, str) else complex(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: not a complex number: {x!r}") from None


def _num(x, where, kind=float):
    try:
        return kind(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {x!r}") from None


def _section(raw, name, allowed, lines):
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name} (line {lines.get(name, '?')}): expected a mapping")
    for k in sec:
        if k not in allowed:
            raise ConfigError(f"unknown key {name}.{k} (line {lines.get(f'{name}.{k}', '?')})")
    return sec


def _build(cls, sec, name, lines):
    try:
        return cls(**sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} (line {lines.get(name, '?')}): {exc}") from None


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    lines = _key_lines(node)

    def at(key):
        return f"{key} (line {lines.get(key, '?')})"

    for k in raw:
        if k not in TOP_KEYS:
            raise ConfigError(f"unknown key {at(k)}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"{at('scenario')}: must be one of {', '.join(SCENARIOS)}")
    kw = {"scenario": scenario, "source": path}

    if "alpha" in raw:
        a = _num(raw["alpha"], at("alpha"))
        if not 0 < a <= np.pi / 4 + 1e-15:
            raise ConfigError(f"{at('alpha')}: must lie in (0, pi/4]")
        kw["alpha"] = a
    if "alphas" in raw:
        al = tuple(_num(a, at("alphas")) for a in (raw["alphas"] or ()))
        if not al or any(not 0 < a <= np.pi / 4 + 1e-15 for a in al):
            raise ConfigError(f"{at('alphas')}: every alpha must lie in (0, pi/4]")
        kw["alphas"] = al
    if "states" in raw and "symmetric_overlap" in raw:
        raise ConfigError(f"{at('symmetric_overlap')}: give either states or symmetric_overlap")
    if "states" in raw:
        try:
            vecs = [np.array([_complex(x, at("states")) for x in row]) for row in raw["states"]]
            kw["states"] = tuple(ModeVector(v) for v in vecs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{at('states')}: {exc}") from None
    if "symmetric_overlap" in raw:
        from .usd import symmetric_states
        s = _num(raw["symmetric_overlap"], at("symmetric_overlap"))
        if not 0 <= s < 1:
            raise ConfigError(f"{at('symmetric_overlap')}: must lie in [0, 1)")
        kw["states"] = tuple(symmetric_states(3, s))
    if "priors" in raw:
        kw["priors"] = tuple(_num(p, at("priors")) for p in raw["priors"])
    if "matrix" in raw and "matrix_file" in raw:
        raise ConfigError(f"{at('matrix_file')}: give either matrix or matrix_file")
    if "matrix" in raw:
        kw["matrix"] = np.array([[_complex(x, at("matrix")) for x in row] for row in raw["matrix"]])
    if "matrix_file" in raw:
        mpath = os.path.join(os.path.dirname(os.path.abspath(path)), raw["matrix_file"])
        if not os.path.exists(mpath):
            raise ConfigError(f"{at('matrix_file')}: file {mpath} does not exist")
        from .formats import load_matrix
        with open(mpath) as fh:
            kw["matrix"] = load_matrix(fh.read())
    if scenario == "custom_unitary" and "matrix" not in kw:
        raise ConfigError("custom_unitary needs 'matrix' or 'matrix_file'")
    if scenario == "qutrit_usd" and "states" not in kw:
        raise ConfigError("qutrit_usd needs 'states' or 'symmetric_overlap'")

    model_keys = {f.name for f in dataclasses.fields(EnsembleModel)}
    msec = dict(_section(raw, "model", model_keys, lines))
    if "phase_jitter_sigma" in msec:
        msec["phase_jitter_sigma"] = _jitter(msec["phase_jitter_sigma"], at("model.phase_jitter_sigma"))
    if "jitter" in raw:
        msec["phase_jitter_sigma"] = _jitter(raw["jitter"], at("jitter"))
    kw["model"] = _build(EnsembleModel, msec, "model", lines)
    layout_keys = {f.name for f in dataclasses.fields(LayoutParams)} - {"allow_nonunitary"}
    kw["layout"] = _build(LayoutParams, _section(raw, "layout", layout_keys, lines), "layout", lines)
    asec = _section(raw, "analysis", ANALYSIS_KEYS, lines)
    for k, v in asec.items():
        kw[k] = _num(v, at(f"analysis.{k}"))
    tol = _section(raw, "tolerances", TOLERANCE_KEYS, lines)
    if tol:
        kw["tolerances"] = {**RunConfig.__dataclass_fields__["tolerances"].default_factory(),
                            **{k: _num(v, at(f"tolerances.{k}")) for k, v in tol.items()}}

    if "seed" in raw:
        kw["seed"] = _num(raw["seed"], at("seed"), int)
    if "trials" in raw:
        kw["trials"] = _num(raw["trials"], at("trials"), int)
        if kw["trials"] < 1:
            raise ConfigError(f"{at('trials')}: must be >= 1")
    if "out" in raw:
        kw["out"] = str(raw["out"])
    if "kernel" in raw:
        if raw["kernel"] not in ("abstract", "spectral"):
            raise ConfigError(f"{at('kernel')}: must be abstract or spectral")
        kw["kernel"] = raw["kernel"]
    return RunConfig(**kw)
