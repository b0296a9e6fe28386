"""Application configuration, loaded from TOML.

Every section is optional: an empty file (or no file) yields a fully
working offline setup with the mock gateway. Unknown keys are rejected
rather than ignored so a typo cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError, ValidationError
from .gateway import KNOWN_ROLES, RoleConfig
from .retrieval import RetrievalConfig


@dataclass(frozen=True)
class GatewayConfig:
    """Which gateway to build and how its roles reach their models."""

    type: str = "mock"  # "mock" or "http"
    dimension: int | None = 64
    backoff_s: float = 0.25
    roles: dict[str, RoleConfig] = field(default_factory=dict)
    embedding: RoleConfig | None = None

    def __post_init__(self) -> None:
        if self.type not in ("mock", "http"):
            raise ConfigError("gateway type must be 'mock' or 'http'")
        if self.type == "http" and self.embedding is None:
            raise ConfigError("http gateway needs an [gateway.embedding] section")
        unknown = sorted(set(self.roles) - set(KNOWN_ROLES))
        if unknown:
            raise ConfigError("unknown gateway roles: %s" % ", ".join(unknown))


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    max_query_tokens: int = 4000

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ConfigError("service port out of range")
        if self.max_query_tokens < 1:
            raise ConfigError("max_query_tokens must be positive")


@dataclass(frozen=True)
class EvalConfig:
    parallelism: int = 4
    judge: bool = False

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise ConfigError("eval parallelism must be positive")


@dataclass(frozen=True)
class PathsConfig:
    data_dir: str | None = None
    templates_dir: str | None = None
    stopwords: str | None = None


@dataclass(frozen=True)
class AppConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError("unknown keys in [%s]: %s" % (where, ", ".join(unknown)))


def _dataclass_from(section: dict, cls, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    _check_keys(section, names, where)
    try:
        return cls(**section)
    except (TypeError, ValidationError) as exc:
        raise ConfigError("bad [%s] section: %s" % (where, exc)) from None


def _role_config(section: dict, where: str) -> RoleConfig:
    return _dataclass_from(section, RoleConfig, where)


def _gateway_config(section: dict) -> GatewayConfig:
    _check_keys(
        section, {"type", "dimension", "backoff_s", "roles", "embedding"}, "gateway"
    )
    roles_section = section.get("roles", {})
    if not isinstance(roles_section, dict):
        raise ConfigError("[gateway.roles] must be a table")
    roles = {
        name: _role_config(body, "gateway.roles.%s" % name)
        for name, body in roles_section.items()
    }
    embedding = None
    if "embedding" in section:
        embedding = _role_config(section["embedding"], "gateway.embedding")
    gtype = section.get("type", "mock")
    dimension = section.get("dimension", 64 if gtype == "mock" else None)
    return GatewayConfig(
        type=gtype,
        dimension=dimension,
        backoff_s=section.get("backoff_s", 0.25),
        roles=roles,
        embedding=embedding,
    )


def load_config(path: str | Path | None = None) -> AppConfig:
    """Parse a TOML config file; with no path, return the defaults."""
    if path is None:
        return AppConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config file not found: %s" % p)
    try:
        with open(p, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config file %s is not valid TOML: %s" % (p, exc)) from None

    _check_keys(raw, {"gateway", "retrieval", "service", "eval", "paths"}, "root")
    kwargs = {}
    if "gateway" in raw:
        kwargs["gateway"] = _gateway_config(raw["gateway"])
    if "retrieval" in raw:
        kwargs["retrieval"] = _dataclass_from(
            raw["retrieval"], RetrievalConfig, "retrieval"
        )
    if "service" in raw:
        kwargs["service"] = _dataclass_from(raw["service"], ServiceConfig, "service")
    if "eval" in raw:
        kwargs["eval"] = _dataclass_from(raw["eval"], EvalConfig, "eval")
    if "paths" in raw:
        kwargs["paths"] = _dataclass_from(raw["paths"], PathsConfig, "paths")
    return AppConfig(**kwargs)
