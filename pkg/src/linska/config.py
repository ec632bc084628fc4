"""Run configuration shared by the library entry points and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    partition_cap: int = 12
    subspace_dim_cap: int = 6
    enumeration_cap: int = 2**26
    oracle_cap: int = 2**30
    worker_count: int = 1
    output_format: str = "human"

    def __post_init__(self):
        for name in ("partition_cap", "subspace_dim_cap", "enumeration_cap", "oracle_cap", "worker_count"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.output_format not in ("human", "machine"):
            raise ValidationError(f"output_format must be 'human' or 'machine', got {self.output_format!r}")

    def recorded(self) -> dict:
        """Settings that can influence results (worker count and format excluded)."""
        d = asdict(self)
        d.pop("worker_count")
        d.pop("output_format")
        return d
