"""
Pydantic model for run manifests.
"""
from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Everything needed to replay a command and check its outputs."""
    command: list[str] = Field(description="argv after the program name")
    config_hash: str = Field(description="sha256 of the canonical JSON of the parsed options and config files")
    seed: int = Field(description="Master seed")
    versions: dict[str, str] = Field(default_factory=dict, description="Package versions")
    wall_time_s: float = Field(description="Wall-clock seconds; the only non-replayable field")
    exit_code: int = Field(description="Exit code of the command")
    outputs: dict[str, str] = Field(default_factory=dict, description="Output file name -> sha256")
