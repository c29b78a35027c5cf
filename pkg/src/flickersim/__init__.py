"""Discrete-event simulation of a variable-bitrate IP camera driven into
traffic amplification by a flickering light, and the resulting congestion
on wired and wireless shared-bottleneck networks."""

__version__ = "0.1.0"

from .codec import CodecMode, CodecParams, FrameRecord, FrameType
from .config import ScenarioConfig, Topology, load_scenario, parse_scenario
from .harness import run_experiment, sweep
from .scene import SceneKind, SceneProfile, SceneState, angle_attenuation, generate_scene

__all__ = [
    "CodecMode", "CodecParams", "FrameRecord", "FrameType",
    "ScenarioConfig", "Topology", "load_scenario", "parse_scenario",
    "run_experiment", "sweep",
    "SceneKind", "SceneProfile", "SceneState", "angle_attenuation",
    "generate_scene",
    "__version__",
]
