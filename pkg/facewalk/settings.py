"""Toolkit settings."""
import os
from typing import Any, Callable, Dict, Literal, cast

from log2me import LogSettings
from pydantic import BaseModel, Field
from pydantic_settings import SettingsConfigDict
from pydantic_settings_yaml import YamlBaseSettings

from facewalk.schemas.experiment import ExperimentConfig


class YamlSettingsConfigDict(SettingsConfigDict):
    yaml_file: str


class ExperimentSettings(BaseModel):
    """Defaults applied to every experiment and route."""

    master_seed: int = Field(
        0,
        ge=0,
        description="The seed experiments derive their run seeds from.",
    )
    workers: int = Field(
        1,
        gt=0,
        description="Worker processes used by the experiment harness.",
    )
    attempt_limit: int = Field(
        500,
        gt=0,
        description=(
            "Rejected generation attempts after which a (n, u) cell "
            "is discarded."
        ),
    )
    both_entry_points: bool = Field(
        False,
        description=(
            "Make both end points of a crossing edge entry points "
            "instead of the one closer to the destination."
        ),
    )
    hand: Literal["L", "R"] = Field(
        "R",
        description="Hand of the single direction algorithms.",
    )
    output_format: Literal["csv", "json"] = Field(
        "csv",
        description="Format of the per-run results file.",
    )


def desk_preset() -> ExperimentConfig:
    """The sweep the acceptance checks run in minutes."""
    return ExperimentConfig(
        node_counts=[40, 80],
        u_values=[0.9, 0.5, 0.3],
        graphs_per_density=10,
        pairs_per_graph=10,
    )


def _default_presets() -> Dict[str, ExperimentConfig]:
    return {"desk": desk_preset(), "full": ExperimentConfig()}


class Settings(YamlBaseSettings):
    """Settings read from config file and from environment."""

    model_config = YamlSettingsConfigDict(
        env_prefix="FACEWALK_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        yaml_file=os.environ.get("FACEWALK_CONFIG", "config.yaml"),
    )

    log: LogSettings = Field(
        default_factory=cast(Callable[[], Any], LogSettings),
        description="Logging settings.",
    )

    experiment: ExperimentSettings = Field(
        default_factory=cast(Callable[[], Any], ExperimentSettings),
        description="Experiment defaults.",
    )

    presets: Dict[str, ExperimentConfig] = Field(
        default_factory=_default_presets,
        description="Named experiment sweeps.",
    )

    def preset(self, name: str) -> ExperimentConfig:
        """A preset with the experiment defaults applied.

        Raises:
            KeyError: there is no such preset.
        """
        base = self.presets[name]
        ex = self.experiment
        return base.model_copy(
            update={
                "master_seed": ex.master_seed,
                "workers": ex.workers,
                "attempt_limit": ex.attempt_limit,
                "both_entry_points": ex.both_entry_points,
                "hand": ex.hand,
            }
        )
