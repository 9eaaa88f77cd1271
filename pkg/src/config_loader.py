"""Experiment config files: JSON in, ExperimentConfig out, and back.

A config names a true model, a model spec, the sample sizes and the grid;
everything else falls back to the defaults in config.py. Unknown keys are
errors. config_to_dict echoes a fully resolved config that parse_config
turns back into the same experiment.
"""

import json
import math
from dataclasses import MISSING, fields
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Tuple, Union

import numpy as np

from config import (
    DEFAULT_MC_SAMPLES, DEFAULT_REPLICATES, DEFAULT_ROOT_SEED, GRID_POINTS,
    METRICS, TAU_MAX, TAU_MIN
)
from experiments import (
    BernoulliIID, ExperimentConfig, IncompatibleConfigError, MixtureRegression,
    NormalIID, StudentTIID, TrueModel
)
from models import BetaBernoulliSpec, LinRegSpec, ModelSpec, NormalLocationSpec
from selection import TempGrid

__all__ = [
    "ConfigError", "IncompatibleConfigError", "load_config", "parse_config",
    "config_to_dict",
]


class ConfigError(Exception):
    """A config file is malformed or names invalid values.

    The message starts with the location of the problem: 'line N column M'
    for syntax errors, or the dotted path of the offending field.
    """


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise _fail(path, f"expected true or false, got {value!r}")
    return value


def _numbers(value: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(value, list):
        raise _fail(path, f"expected a list of numbers, got {value!r}")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _variance(value: Any, path: str) -> float:
    if value == "flat":
        return math.inf
    return _number(value, path)


def _section(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise _fail(path, f"expected an object, got {value!r}")
    return value


def _check_keys(section: Mapping[str, Any], allowed, path: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        prefix = f"{path}." if path else ""
        raise _fail(f"{prefix}{unknown[0]}", "unknown key")


Field = Callable[[Any, str], Any]

_TRUE_MODELS: Dict[str, Tuple[type, Dict[str, Field]]] = {
    "normal": (NormalIID, {"theta": _number, "sd": _number}),
    "student_t": (StudentTIID,
                  {"df": _number, "loc": _number, "scale": _number}),
    "bernoulli": (BernoulliIID, {"theta": _number}),
    "mixture_regression": (MixtureRegression, {
        "beta": _numbers, "noise_sd": _number, "outlier_rate": _number,
        "outlier_sd": _number,
    }),
}

_MODELS: Dict[str, Tuple[type, Dict[str, Field]]] = {
    "normal_location": (NormalLocationSpec, {
        "likelihood_sd": _number, "prior_mean": _number,
        "prior_var": _variance,
    }),
    "beta_bernoulli": (BetaBernoulliSpec,
                       {"prior_a": _number, "prior_b": _number}),
}


def _build(section: Mapping[str, Any], path: str,
           registry: Dict[str, Tuple[type, Dict[str, Field]]], kinds=None):
    kind = section.get("kind")
    if kind not in registry:
        expected = sorted(kinds or registry)
        raise _fail(f"{path}.kind", f"expected one of {expected}, got {kind!r}")
    cls, converters = registry[kind]
    _check_keys(section, {"kind", *converters}, path)
    kwargs = {}
    for f in fields(cls):
        if f.name not in converters:
            continue
        if f.name in section:
            kwargs[f.name] = converters[f.name](section[f.name],
                                                f"{path}.{f.name}")
        elif f.default is MISSING and f.default_factory is MISSING:
            raise _fail(f"{path}.{f.name}", "missing required key")
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise _fail(path, str(e))


def _linear_regression(section: Mapping[str, Any], path: str) -> LinRegSpec:
    _check_keys(section, {"kind", "noise_sd", "prior_cov", "dim"}, path)
    for key in ("noise_sd", "prior_cov"):
        if key not in section:
            raise _fail(f"{path}.{key}", "missing required key")
    noise_sd = _number(section["noise_sd"], f"{path}.noise_sd")
    cov = section["prior_cov"]
    try:
        if isinstance(cov, list):
            if "dim" in section:
                raise _fail(f"{path}.dim", "only allowed with a scalar prior_cov")
            rows = [_numbers(row, f"{path}.prior_cov[{i}]")
                    for i, row in enumerate(cov)]
            return LinRegSpec(noise_sd, np.array(rows))
        if "dim" not in section:
            raise _fail(f"{path}.dim", "required with a scalar prior_cov")
        dim = _integer(section["dim"], f"{path}.dim")
        if dim < 1:
            raise _fail(f"{path}.dim", f"must be positive, got {dim}")
        variance = _number(cov, f"{path}.prior_cov")
        return LinRegSpec.isotropic(noise_sd, variance, dim)
    except ValueError as e:
        raise _fail(path, str(e))


def _model(section: Any, path: str) -> ModelSpec:
    section = _section(section, path)
    if section.get("kind") == "linear_regression":
        return _linear_regression(section, path)
    return _build(section, path, _MODELS,
                  kinds=[*_MODELS, "linear_regression"])


def _grid(section: Any, path: str) -> TempGrid:
    section = _section(section, path)
    try:
        if "points" in section:
            _check_keys(section, {"points"}, path)
            return TempGrid(_numbers(section["points"], f"{path}.points"))
        _check_keys(section, {"lo", "hi", "count"}, path)
        lo = _number(section.get("lo", TAU_MIN), f"{path}.lo")
        hi = _number(section.get("hi", TAU_MAX), f"{path}.hi")
        count = _integer(section.get("count", GRID_POINTS), f"{path}.count")
        return TempGrid.log_spaced(lo, hi, count)
    except ValueError as e:
        raise _fail(path, str(e))


_TOP_LEVEL = {
    "true_model", "model", "n_values", "replicates", "grid", "metric",
    "mc_samples", "root_seed", "scale_by_sqrt_n", "limits",
}


def parse_config(document: Any) -> ExperimentConfig:
    """Build an ExperimentConfig from a decoded JSON document.

    Raises:
        ConfigError: On unknown keys, missing keys or invalid values.
    """
    document = _section(document, "config")
    _check_keys(document, _TOP_LEVEL, "")
    for key in ("true_model", "model", "n_values"):
        if key not in document:
            raise _fail(key, "missing required key")

    true_model = _build(_section(document["true_model"], "true_model"),
                        "true_model", _TRUE_MODELS)
    model_spec = _model(document["model"], "model")

    n_values = document["n_values"]
    if not isinstance(n_values, list) or not n_values:
        raise _fail("n_values", "expected a nonempty list of integers")
    n_values = tuple(_integer(n, f"n_values[{i}]")
                     for i, n in enumerate(n_values))

    metric = document.get("metric", "tvd")
    if metric not in METRICS:
        raise _fail("metric", f"expected one of {METRICS}, got {metric!r}")

    kwargs = dict(
        true_model=true_model,
        model_spec=model_spec,
        n_values=n_values,
        replicates=_integer(document.get("replicates", DEFAULT_REPLICATES),
                            "replicates"),
        metric=metric,
        mc_samples=_integer(document.get("mc_samples", DEFAULT_MC_SAMPLES),
                            "mc_samples"),
        root_seed=_integer(document.get("root_seed", DEFAULT_ROOT_SEED),
                           "root_seed"),
        scale_by_sqrt_n=_boolean(document.get("scale_by_sqrt_n", False),
                                 "scale_by_sqrt_n"),
        limits=_boolean(document.get("limits", False), "limits"),
    )
    if "grid" in document:
        kwargs["grid"] = _grid(document["grid"], "grid")
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as e:
        raise _fail("config", str(e))


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and parse a JSON experiment config.

    Raises:
        ConfigError: If the file is missing, is not valid JSON, or fails
            schema checks. Syntax errors report line and column.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} column {e.colno}: {e.msg}")
    return parse_config(document)


def _registry_dict(obj, registry) -> Dict[str, Any]:
    for kind, (cls, converters) in registry.items():
        if type(obj) is cls:
            out: Dict[str, Any] = {"kind": kind}
            for name in converters:
                value = getattr(obj, name)
                if isinstance(value, tuple):
                    value = list(value)
                elif isinstance(value, float) and math.isinf(value):
                    value = "flat"
                out[name] = value
            return out
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _true_model_dict(tm: TrueModel) -> Dict[str, Any]:
    return _registry_dict(tm, _TRUE_MODELS)


def _model_dict(spec: ModelSpec) -> Dict[str, Any]:
    if isinstance(spec, LinRegSpec):
        return {"kind": "linear_regression", "noise_sd": spec.noise_sd,
                "prior_cov": spec.prior_cov.tolist()}
    return _registry_dict(spec, _MODELS)


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Fully resolved, JSON-ready echo of a config; grids as explicit points."""
    return {
        "true_model": _true_model_dict(cfg.true_model),
        "model": _model_dict(cfg.model_spec),
        "n_values": list(cfg.n_values),
        "replicates": cfg.replicates,
        "grid": {"points": cfg.grid.points.tolist()},
        "metric": cfg.metric,
        "mc_samples": cfg.mc_samples,
        "root_seed": cfg.root_seed,
        "scale_by_sqrt_n": cfg.scale_by_sqrt_n,
        "limits": cfg.limits,
    }
