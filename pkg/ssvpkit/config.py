"""
ssvpkit solver configuration.

Handles solver settings via environment variables, JSON config files, or direct initialization.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

from ssvpkit.errors import InvalidInputError, MalformedInputError

# Environment variable -> (field name, parser)
_ENV_FIELDS: dict[str, tuple[str, type]] = {
    "SSVPKIT_SEED": ("rng_seed", int),
    "SSVPKIT_MAX_ITERS": ("max_iters", int),
    "SSVPKIT_RESIDUAL_TOL": ("residual_tol", float),
    "SSVPKIT_EPSILON_SEED": ("epsilon_seed", float),
    "SSVPKIT_DAMPING": ("damping", float),
}


@dataclass(frozen=True)
class SolverConfig:
    """
    Configuration for the continuation solvers in :mod:`ssvpkit.flow`.

    Can be initialized directly or loaded from environment variables / a JSON file.

    Args:
        epsilon_seed: Magnitude of new-entry seeds, relative to the smallest
            positive singular value (env: SSVPKIT_EPSILON_SEED, default: 0.05)
        max_iters: Levenberg-Marquardt iterations per solve (env: SSVPKIT_MAX_ITERS, default: 100)
        residual_tol: Convergence threshold relative to max(1, ||A||_F)
            (env: SSVPKIT_RESIDUAL_TOL, default: 1e-12)
        damping: Initial Levenberg-Marquardt parameter (env: SSVPKIT_DAMPING, default: 1e-6)
        step_backtrack: Shrink factor for the liberation step t (default: 0.5)
        rng_seed: Seed for every random choice a solver makes (env: SSVPKIT_SEED, default: 42)
        max_retries: Epsilon halvings before the superpattern solver gives up (default: 6)
        liberation_t0: First liberation step, relative to ||A||_F (default: 0.1)
        liberation_min_t: Smallest liberation step tried (default: 1e-6)
        locality: Bifurcation reach per stage, relative to sigma_1 (default: 0.1)
        homotopy_stages: Stages used when a bifurcation target is out of reach (default: 10)
    """

    epsilon_seed: float = 0.05
    max_iters: int = 100
    residual_tol: float = 1e-12
    damping: float = 1e-6
    step_backtrack: float = 0.5
    rng_seed: int = 42
    max_retries: int = 6
    liberation_t0: float = 0.1
    liberation_min_t: float = 1e-6
    locality: float = 0.1
    homotopy_stages: int = 10

    def __post_init__(self) -> None:
        errors = self.validate()
        if errors:
            raise InvalidInputError(
                "Configuration errors:\n" + "\n".join(f"  - {e}" for e in errors)
            )

    @classmethod
    def from_env(cls, base: Optional[SolverConfig] = None) -> SolverConfig:
        """
        Create configuration from environment variables.

        Environment variables:
            SSVPKIT_SEED: rng_seed (default: 42)
            SSVPKIT_MAX_ITERS: max_iters (default: 100)
            SSVPKIT_RESIDUAL_TOL: residual_tol (default: 1e-12)
            SSVPKIT_EPSILON_SEED: epsilon_seed (default: 0.05)
            SSVPKIT_DAMPING: damping (default: 1e-6)

        Unset variables keep the value from ``base`` (or the defaults).
        """
        overrides: dict[str, Any] = {}
        for env_name, (field_name, parse) in _ENV_FIELDS.items():
            raw = os.getenv(env_name, "").strip()
            if not raw:
                continue
            try:
                overrides[field_name] = parse(raw)
            except ValueError as exc:
                raise InvalidInputError(
                    f"{env_name} must be a {parse.__name__} (got: {raw!r})"
                ) from exc
        return (base or cls()).merged(**overrides)

    @classmethod
    def from_file(cls, path: str | Path, base: Optional[SolverConfig] = None) -> SolverConfig:
        """Load a JSON object whose keys are SolverConfig field names."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidInputError(f"Cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        if not isinstance(data, dict):
            raise MalformedInputError("config file must hold a JSON object", line=1, column=1)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidInputError(f"Unknown config keys: {', '.join(unknown)}")
        return (base or cls()).merged(**data)

    @classmethod
    def resolve(cls, config_path: str | Path | None = None) -> SolverConfig:
        """
        Defaults, then the environment, then ``config_path``.

        SSVPKIT_SEED wins over a seed set in the file.
        """
        cfg = cls.from_env()
        if config_path is not None:
            cfg = cls.from_file(config_path, base=cfg)
            seed = os.getenv("SSVPKIT_SEED", "").strip()
            if seed:
                try:
                    cfg = cfg.merged(rng_seed=int(seed))
                except ValueError as exc:
                    raise InvalidInputError(f"SSVPKIT_SEED must be a int (got: {seed!r})") from exc
        return cfg

    def merged(self, **overrides: Any) -> SolverConfig:
        """Return a copy with ``overrides`` applied (None values are ignored)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def validate(self) -> list[str]:
        """Validate configuration and return list of errors."""
        errors = []
        for name in ("epsilon_seed", "damping", "liberation_t0", "liberation_min_t", "locality"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be positive (got: {getattr(self, name)})")
        for name in ("max_iters", "max_retries", "homotopy_stages"):
            if int(getattr(self, name)) < 1:
                errors.append(f"{name} must be at least 1 (got: {getattr(self, name)})")
        if not self.residual_tol >= 1e-14:
            errors.append(f"residual_tol must be at least 1e-14 (got: {self.residual_tol})")
        if not 0 < self.step_backtrack < 1:
            errors.append(f"step_backtrack must lie in (0, 1) (got: {self.step_backtrack})")
        if self.rng_seed < 0:
            errors.append(f"rng_seed must be nonnegative (got: {self.rng_seed})")
        return errors
