"""Run configuration loaded from a JSON document."""

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .exceptions import FormatError, InvalidConfigError, OracleInputError
from .oracle import ExternalOracle, SyntheticOracle
from .scores import Lambdas
from .search import GREEDY_MODES

PROFILES = {"face": (28, 98), "fine": (10, 25)}
ORACLE_ENV = "SMATTR_ORACLE_CMD"

_SYNTHETIC_DEFAULTS = {"seed": 0, "feature_dim": 32, "categories": 10}


@dataclass
class RunConfig:
    n: int = 10
    m: int = 25
    k: int = None
    lambdas: tuple = (1.0, 1.0, 1.0, 1.0)
    oracle: dict = field(default_factory=lambda: {"backend": "synthetic", **_SYNTHETIC_DEFAULTS})
    target_mode: str = "image"
    category: int = None
    division: str = "prior"
    image: str = None
    saliency: str = None
    output_dir: str = "."
    trials: int = 1000
    seed: int = 0
    mode: str = "greedy"
    threads: int = 1
    profile: str = None
    base_dir: str = field(default=".", repr=False)

    @property
    def budget(self):
        return self.m if self.k is None else self.k

    def resolve(self, path):
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def validate(self):
        if self.division not in ("prior", "uniform"):
            raise InvalidConfigError(f"division must be 'prior' or 'uniform', got {self.division!r}")
        if self.n < 1:
            raise InvalidConfigError("n must be >= 1")
        if self.division == "prior":
            if self.m < 1 or (self.n * self.n) % self.m:
                raise InvalidConfigError(f"n*n = {self.n * self.n} is not divisible by m = {self.m}")
        m = self.n * self.n if self.division == "uniform" else self.m
        if self.k is not None and not 1 <= self.k <= m:
            raise InvalidConfigError(f"k must lie in [1, {m}], got {self.k}")
        Lambdas.coerce(self.lambdas)
        if self.target_mode not in ("image", "category"):
            raise InvalidConfigError(f"target_mode must be 'image' or 'category', got {self.target_mode!r}")
        if self.target_mode == "category" and self.category is None:
            raise InvalidConfigError("target_mode 'category' needs a category index")
        if self.mode not in GREEDY_MODES:
            raise InvalidConfigError(f"mode must be one of {GREEDY_MODES}")
        if self.threads < 1:
            raise InvalidConfigError("threads must be >= 1")
        backend = self.oracle.get("backend")
        if backend == "synthetic":
            if self.oracle.get("command") or self.oracle.get("address"):
                raise InvalidConfigError("synthetic oracle takes no command or address")
        elif backend == "external":
            if bool(self.oracle.get("command")) == bool(self.oracle.get("address")):
                raise InvalidConfigError("external oracle needs exactly one of command or address")
        else:
            raise InvalidConfigError(f"unknown oracle backend {backend!r}")
        return self

    def echo(self):
        """Fields that determine results; excludes paths of outputs and thread counts."""
        return {
            "n": self.n, "m": self.m, "k": self.budget, "lambdas": list(Lambdas.coerce(self.lambdas).as_list()),
            "oracle": dict(sorted(self.oracle.items())), "target_mode": self.target_mode,
            "category": self.category, "division": self.division, "mode": self.mode,
            "image": self.image, "saliency": self.saliency,
        }

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None}).validate()


def _normalise_oracle(raw):
    if raw is None:
        env = os.environ.get(ORACLE_ENV)
        if env:
            return {"backend": "external", "command": env, "timeout_ms": 30000}
        return {"backend": "synthetic", **_SYNTHETIC_DEFAULTS}
    if not isinstance(raw, dict):
        raise InvalidConfigError("oracle must be a JSON object")
    oracle = dict(raw)
    backend = oracle.setdefault("backend", "synthetic")
    if backend == "synthetic":
        for key, value in _SYNTHETIC_DEFAULTS.items():
            oracle.setdefault(key, value)
    elif backend == "external":
        if not oracle.get("command") and not oracle.get("address") and os.environ.get(ORACLE_ENV):
            oracle["command"] = os.environ[ORACLE_ENV]
        oracle.setdefault("timeout_ms", 30000)
    return oracle


def config_from_dict(doc, base_dir="."):
    if not isinstance(doc, dict):
        raise InvalidConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"base_dir"}
    unknown = set(doc) - known
    if unknown:
        raise InvalidConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
    doc = dict(doc)
    profile = doc.get("profile")
    if profile is not None:
        if profile not in PROFILES:
            raise InvalidConfigError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
        n, m = PROFILES[profile]
        doc.setdefault("n", n)
        doc.setdefault("m", m)
    doc["oracle"] = _normalise_oracle(doc.get("oracle"))
    if "lambdas" in doc:
        try:
            doc["lambdas"] = tuple(Lambdas.coerce(doc["lambdas"]).as_list())
        except ValueError as exc:
            raise InvalidConfigError(f"invalid lambdas: {exc}") from exc
    try:
        cfg = RunConfig(**doc, base_dir=str(base_dir))
        for name in ("n", "m", "trials", "seed", "threads"):
            setattr(cfg, name, int(getattr(cfg, name)))
        if cfg.k is not None:
            cfg.k = int(cfg.k)
        if cfg.category is not None:
            cfg.category = int(cfg.category)
    except (TypeError, ValueError) as exc:
        raise InvalidConfigError(f"invalid config: {exc}") from exc
    return cfg.validate()


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(doc, base_dir=Path(path).resolve().parent)


def build_oracle(oracle_cfg, shape):
    """Instantiate the configured oracle for images of ``shape``."""
    if oracle_cfg["backend"] == "synthetic":
        return SyntheticOracle(shape, seed=int(oracle_cfg["seed"]), feature_dim=int(oracle_cfg["feature_dim"]),
                               n_categories=int(oracle_cfg["categories"]),
                               zero_head=bool(oracle_cfg.get("zero_head", False)))
    oracle = ExternalOracle(command=oracle_cfg.get("command"), address=oracle_cfg.get("address"),
                            timeout_ms=float(oracle_cfg.get("timeout_ms", 30000)))
    if tuple(oracle.shape) != tuple(shape):
        oracle.close()
        raise OracleInputError(f"external oracle expects shape {oracle.shape}, image has {tuple(shape)}")
    return oracle
