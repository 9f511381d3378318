"""Experiment configuration: a flat JSON document with strict key checking.

The config file is a single JSON object whose keys map one-to-one onto
:class:`ExperimentConfig` fields.  Unknown keys are errors rather than
warnings so that a typo cannot silently fall back to a default.  Law,
potential, and initial-condition specs are short strings ("rademacher",
"doublewell", "uniform:1.0"); custom entry laws live in their own JSON
file referenced as "custom:<path>".
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .disorder import (
    CENTERED_EXPONENTIAL,
    GAUSSIAN,
    RADEMACHER,
    CustomSampler,
    DisorderLaw,
)
from .dynamics import default_a2
from .model import (
    InitialLaw,
    Potential,
    double_well,
    log_barrier,
    point_mass,
    uniform_symmetric,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_law",
    "parse_potential",
    "parse_initial",
]


class ConfigError(ValueError):
    """Invalid configuration file or spec string."""


# Keys allowed in a custom-law JSON file.
_CUSTOM_LAW_KEYS = {
    "name",
    "distribution",
    "args",
    "loc",
    "scale",
    "mean",
    "variance",
    "third_abs_moment",
}


def _load_custom_law(path: Path) -> CustomSampler:
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read custom law file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"custom law file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"custom law file {path} must hold a JSON object")
    unknown = set(raw) - _CUSTOM_LAW_KEYS
    if unknown:
        raise ConfigError(
            f"unknown keys in custom law file {path}: {sorted(unknown)}"
        )
    if "distribution" not in raw:
        raise ConfigError(f"custom law file {path} lacks 'distribution'")

    import scipy.stats as st

    dist_name = raw["distribution"]
    dist_gen = getattr(st, dist_name, None)
    if dist_gen is None or not hasattr(dist_gen, "rvs"):
        raise ConfigError(f"unknown scipy.stats distribution {dist_name!r}")
    args = raw.get("args", [])
    if not isinstance(args, list):
        raise ConfigError("custom law 'args' must be a list of shape parameters")
    loc = float(raw.get("loc", 0.0))
    scale = float(raw.get("scale", 1.0))
    try:
        frozen = dist_gen(*args, loc=loc, scale=scale)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {dist_name!r}: {exc}") from exc

    def sampler(count, generator, _frozen=frozen):
        return _frozen.rvs(size=count, random_state=generator)

    def moment(key):
        val = raw.get(key)
        return None if val is None else float(val)

    return CustomSampler(
        name=str(raw.get("name", path.stem)),
        sampler=sampler,
        mean=moment("mean"),
        variance=moment("variance"),
        third_abs_moment=moment("third_abs_moment"),
    )


def parse_law(spec: str, base_dir: Path | None = None) -> DisorderLaw:
    """Resolve a law spec string to a DisorderLaw instance."""
    if not isinstance(spec, str):
        raise ConfigError(f"law spec must be a string, got {spec!r}")
    name = spec.strip()
    builtin = {
        "gaussian": GAUSSIAN,
        "rademacher": RADEMACHER,
        "cexp": CENTERED_EXPONENTIAL,
    }
    if name in builtin:
        return builtin[name]
    if name.startswith("custom:"):
        rel = Path(name[len("custom:"):])
        path = rel if rel.is_absolute() or base_dir is None else base_dir / rel
        return _load_custom_law(path)
    raise ConfigError(
        f"unknown law spec {spec!r}; expected gaussian, rademacher, cexp, "
        f"or custom:<path>"
    )


def parse_potential(spec: str, s_bound: float) -> Potential:
    if not isinstance(spec, str):
        raise ConfigError(f"potential spec must be a string, got {spec!r}")
    name = spec.strip().lower()
    if name == "doublewell":
        return double_well(s_bound)
    if name == "logbarrier":
        return log_barrier(s_bound)
    raise ConfigError(
        f"unknown potential spec {spec!r}; expected doublewell or logbarrier"
    )


def parse_initial(spec: str, s_bound: float) -> InitialLaw:
    if not isinstance(spec, str):
        raise ConfigError(f"initial spec must be a string, got {spec!r}")
    kind, sep, arg = spec.strip().partition(":")
    if not sep:
        raise ConfigError(
            f"initial spec {spec!r} lacks a parameter; expected point:<x0> "
            f"or uniform:<a>"
        )
    try:
        value = float(arg)
    except ValueError as exc:
        raise ConfigError(f"bad numeric parameter in initial spec {spec!r}") from exc
    try:
        if kind == "point":
            return point_mass(value, s_bound)
        if kind == "uniform":
            return uniform_symmetric(value, s_bound)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown initial kind {kind!r}; expected point or uniform")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment settings.

    ``a2 = None`` in the file resolves to the beta-dependent default
    ``2*beta + 0.5`` at load time, so the stored object always carries a
    concrete number.  ``config_hash`` excludes ``output_dir``: moving the
    output does not change the experiment's identity.
    """

    n_particles: int = 100
    beta: float = 1.0
    s_bound: float = 2.0
    horizon: float = 2.0
    kappa: int = 10
    substeps: int = 20
    master_seed: int = 31416
    potential: str = "doublewell"
    initial: str = "uniform:1.0"
    laws: tuple = ("gaussian", "rademacher", "gaussian")
    replicas: int = 200
    n_sweep: tuple = (25, 50, 100, 200)
    kappa_sweep: tuple = (5, 10, 20, 40)
    thermal_samples: int = 1
    phi_replicas: int = 30
    freeze_replicas: int = 50
    norm_samples: int = 20
    bootstrap_resamples: int = 400
    rho: float = 0.1
    a2: float | None = None
    eps: float = 0.05
    c1: float = 1.0
    gamma: float = 2.25
    lindeberg_instances: int = 500
    gaussian_check_instances: int = 50
    gaussian_check_samples: int = 1_000_000
    output_dir: str = "spinlab-out"
    base_dir: Path = field(default_factory=Path, compare=False)

    def __post_init__(self):
        ints = {
            "n_particles": 1,
            "kappa": 1,
            "substeps": 1,
            "replicas": 1,
            "thermal_samples": 1,
            "phi_replicas": 1,
            "freeze_replicas": 2,
            "norm_samples": 1,
            "bootstrap_resamples": 2,
            "lindeberg_instances": 1,
            "gaussian_check_instances": 1,
            "gaussian_check_samples": 1000,
            "master_seed": 0,
        }
        for name, lo in ints.items():
            val = getattr(self, name)
            if not isinstance(val, int) or isinstance(val, bool) or val < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {val!r}")
        if self.master_seed >= 1 << 64:
            raise ConfigError("master_seed must fit in 64 bits")
        for name in ("beta", "s_bound", "horizon", "rho", "eps", "c1", "gamma"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"{name} must be a number, got {val!r}")
            if not math.isfinite(val):
                raise ConfigError(f"{name} must be finite, got {val!r}")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.s_bound <= 0 or self.horizon <= 0 or self.rho <= 0:
            raise ConfigError("s_bound, horizon, and rho must be positive")
        if self.c1 < 0:
            raise ConfigError("c1 must be >= 0")
        if not 2.0 <= self.gamma < 2.5:
            raise ConfigError("gamma must lie in [2, 2.5)")
        if self.a2 is None:
            object.__setattr__(self, "a2", default_a2(self.beta))
        if not isinstance(self.a2, (int, float)) or self.a2 <= 0:
            raise ConfigError(f"a2 must be a positive number, got {self.a2!r}")
        for name in ("laws", "n_sweep", "kappa_sweep"):
            seq = getattr(self, name)
            if isinstance(seq, list):
                object.__setattr__(self, name, tuple(seq))
                seq = getattr(self, name)
            if not isinstance(seq, tuple) or not seq:
                raise ConfigError(f"{name} must be a nonempty list")
        if any(not isinstance(n, int) or n < 1 for n in self.n_sweep):
            raise ConfigError("n_sweep entries must be positive integers")
        if any(not isinstance(k, int) or k < 1 for k in self.kappa_sweep):
            raise ConfigError("kappa_sweep entries must be positive integers")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a nonempty string")
        # Custom-law paths resolve against the config file's directory once,
        # so a persisted config replays from anywhere.
        resolved = []
        for spec in self.laws:
            if isinstance(spec, str) and spec.startswith("custom:"):
                rel = Path(spec[len("custom:"):])
                if not rel.is_absolute():
                    spec = f"custom:{(self.base_dir / rel).resolve()}"
            resolved.append(spec)
        object.__setattr__(self, "laws", tuple(resolved))
        # Fail fast on malformed spec strings; objects are rebuilt on demand.
        self.potential_obj()
        self.initial_obj()
        self.law_objs()

    def potential_obj(self) -> Potential:
        return parse_potential(self.potential, self.s_bound)

    def initial_obj(self) -> InitialLaw:
        return parse_initial(self.initial, self.s_bound)

    def law_objs(self) -> list[DisorderLaw]:
        return [parse_law(spec, self.base_dir) for spec in self.laws]

    def law_labels(self) -> list[str]:
        """Unique report labels: repeats get an @k suffix (gaussian@2, ...).

        Repeated laws are legitimate (a same-law pair measures the noise
        floor); disorder seeds are derived from the position in the list,
        so repeats receive independent draws.
        """
        labels, seen = [], {}
        for law in self.law_objs():
            k = seen.get(law.name, 0) + 1
            seen[law.name] = k
            labels.append(law.name if k == 1 else f"{law.name}@{k}")
        return labels

    def total_steps(self) -> int:
        return self.kappa * self.substeps

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "base_dir":
                continue
            val = getattr(self, f.name)
            out[f.name] = list(val) if isinstance(val, tuple) else val
        return out

    def config_hash(self) -> str:
        payload = self.as_dict()
        payload.pop("output_dir")
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def with_seed(self, master_seed: int) -> "ExperimentConfig":
        payload = self.as_dict()
        payload["master_seed"] = master_seed
        return ExperimentConfig(base_dir=self.base_dir, **payload)

    def with_output_dir(self, output_dir: str) -> "ExperimentConfig":
        payload = self.as_dict()
        payload["output_dir"] = output_dir
        return ExperimentConfig(base_dir=self.base_dir, **payload)


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)} - {"base_dir"}


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional JSON file plus overrides.

    Raises ConfigError on unreadable files, non-object JSON, unknown keys,
    or invalid values.  With no file and no overrides this returns the
    default experiment.
    """
    payload: dict = {}
    base_dir = Path()
    if path is not None:
        path = Path(path)
        base_dir = path.parent
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        payload.update(raw)
    if overrides:
        payload.update(overrides)
    unknown = set(payload) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(base_dir=base_dir, **payload)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
