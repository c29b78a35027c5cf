"""Scene dynamics models for a surveillance camera's field of view.

Three profiles are supported: a static indoor scene, ordinary in-scene
motion (people walking, doors opening), and a flickering-light dazzle
whose frame-to-frame impact depends on the beam's incidence angles.
The output is a per-frame descriptor pair: spatial complexity (detail
richness within the frame) and temporal novelty (fraction of the frame
content that cannot be predicted from the previous frame).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from random import Random

FPS_MIN = 24
FPS_MAX = 120

# Horizontal attenuation decays linearly from 1.0 at 0 degrees to H_FLOOR at
# H_FLOOR_DEG, continuing on the same slope to zero beyond that.  Vertical
# attenuation is flat until an abrupt cutoff.
H_FLOOR = 0.2
H_FLOOR_DEG = 60.0
V_CUTOFF_DEG = 45.0

# Per-frame novelty of an unattenuated flicker: almost the whole frame is
# unpredictable, with a little residual wobble from beam vibration.
FLICKER_NOVELTY_MIN = 0.93
FLICKER_NOVELTY_MAX = 1.0

NATURAL_NOVELTY_LO = 0.01
NATURAL_NOVELTY_HI = 0.1


class SceneKind(Enum):
    STATIC = "static"
    NATURAL_MOTION = "natural_motion"
    FLICKER = "flicker"


@dataclass(frozen=True)
class SceneState:
    """Dynamics of one captured frame. Both descriptors lie in [0, 1]."""

    frame_index: int
    spatial_complexity: float
    temporal_novelty: float


@dataclass(frozen=True)
class SceneProfile:
    kind: SceneKind
    flicker_rate_hz: float = 240.0
    horizontal_angle_deg: float = 0.0
    vertical_angle_deg: float = 0.0
    rng_seed: int = 0


@dataclass(frozen=True)
class AngleAttenuation:
    """Multiplier in [0, 1] applied to the flicker's temporal novelty."""

    factor: float


def angle_attenuation(h_deg: float, v_deg: float) -> AngleAttenuation:
    """How much an off-axis beam loses of its frame-to-frame impact.

    Direct incidence (0, 0) gives 1.0.  The factor falls off linearly with
    the horizontal angle and is flat-then-zero in the vertical angle.
    """
    if not (-90.0 <= h_deg <= 90.0 and -90.0 <= v_deg <= 90.0):
        raise ValueError("incidence angles must lie in [-90, 90] degrees")
    h = abs(h_deg)
    v = abs(v_deg)
    h_factor = max(0.0, 1.0 - (1.0 - H_FLOOR) * h / H_FLOOR_DEG)
    v_factor = 1.0 if v < V_CUTOFF_DEG else 0.0
    return AngleAttenuation(h_factor * v_factor)


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def generate_scene(profile: SceneProfile, duration_s: float, fps: int) -> list[SceneState]:
    """Generate ceil(duration_s * fps) frame descriptors for a profile.

    Deterministic for a fixed (profile, duration, fps); the profile's
    rng_seed drives all randomness.
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    if not FPS_MIN <= fps <= FPS_MAX:
        raise ValueError(f"fps must lie in [{FPS_MIN}, {FPS_MAX}], got {fps}")
    if profile.kind is SceneKind.FLICKER and profile.flicker_rate_hz < 2 * fps:
        # Below twice the frame rate the stripe pattern can repeat between
        # consecutive frames and the novelty model does not hold.
        raise ValueError("flicker_rate_hz must be at least twice the frame rate")

    n = math.ceil(duration_s * fps)
    rng = Random(profile.rng_seed)
    states: list[SceneState] = []

    if profile.kind is SceneKind.FLICKER:
        factor = angle_attenuation(
            profile.horizontal_angle_deg, profile.vertical_angle_deg
        ).factor
        # Dazzle washes out fine detail: low spatial complexity, near-total
        # novelty scaled by the incidence-angle factor.
        spatial = 0.25
        for i in range(n):
            raw = rng.uniform(FLICKER_NOVELTY_MIN, FLICKER_NOVELTY_MAX)
            states.append(SceneState(i, spatial, raw * factor))
        return states

    spatial = 0.7
    if profile.kind is SceneKind.STATIC:
        for i in range(n):
            spatial = _clamp(spatial + rng.uniform(-0.005, 0.005), 0.5, 0.9)
            states.append(SceneState(i, spatial, 0.0))
        return states

    # Natural motion: a bounded random walk. Motion-compensated encoding
    # absorbs most of it, so the novelty floor stays near zero.
    novelty = 0.05
    for i in range(n):
        spatial = _clamp(spatial + rng.uniform(-0.005, 0.005), 0.5, 0.9)
        novelty = _clamp(novelty + rng.uniform(-0.012, 0.012),
                         NATURAL_NOVELTY_LO, NATURAL_NOVELTY_HI)
        states.append(SceneState(i, spatial, novelty))
    return states
