"""Frame-size model of the camera's encoder.

Maps scene dynamics to encoded frame sizes through a GOP structure with
two measured anchor points per frame type: a quiet-scene size and a
full-dazzle size, linearly interpolated by temporal novelty.  Also
handles constant-bitrate mode and slicing frames into MTU-sized packets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .scene import SceneState

DEFAULT_MTU_PAYLOAD = 1472
# RTP(12) + UDP(8) + IP(20) + Ethernet(14) per packet.
DEFAULT_HEADER_OVERHEAD = 54


class CodecMode(Enum):
    VARIABLE_BITRATE = "vbr"
    CONSTANT_BITRATE = "cbr"


class FrameType(Enum):
    I = "I"
    P = "P"


@dataclass(frozen=True)
class CodecParams:
    fps: int = 60
    gop_length: int = 120
    i_size_base: int = 75_000
    p_size_base: int = 5_000
    attack_frame_size: int = 30_000
    mode: CodecMode = CodecMode.VARIABLE_BITRATE
    cbr_target_bps: float = 2_500_000.0

    def __post_init__(self) -> None:
        if self.gop_length < 1:
            raise ValueError("gop_length must be >= 1")
        if min(self.i_size_base, self.p_size_base, self.attack_frame_size) <= 0:
            raise ValueError("frame size anchors must be positive")
        if self.p_size_base >= self.i_size_base:
            raise ValueError("p_size_base must be smaller than i_size_base")
        if self.mode is CodecMode.CONSTANT_BITRATE and self.cbr_target_bps <= 0:
            raise ValueError("cbr_target_bps must be positive")


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    frame_type: FrameType
    size: int
    timestamp: float


@dataclass(frozen=True)
class PacketChunk:
    """One wire packet of a sliced frame: media payload plus headers."""

    payload: int
    wire_size: int


def frame_type_for(frame_index: int, params: CodecParams) -> FrameType:
    return FrameType.I if frame_index % params.gop_length == 0 else FrameType.P


def frame_size(state: SceneState, frame_type: FrameType, params: CodecParams) -> int:
    """Encoded size in bytes of one frame.

    VBR interpolates linearly between the quiet-scene anchor and the
    full-dazzle anchor by temporal novelty; CBR ignores the scene.
    """
    if params.mode is CodecMode.CONSTANT_BITRATE:
        return int(params.cbr_target_bps / (8 * params.fps))
    novelty = state.temporal_novelty
    base = params.i_size_base if frame_type is FrameType.I else params.p_size_base
    return int(round(base + novelty * (params.attack_frame_size - base)))


def encode_stream(states: list[SceneState], params: CodecParams) -> list[FrameRecord]:
    """Turn a scene into the frame sequence the camera would emit."""
    frames = []
    for state in states:
        ftype = frame_type_for(state.frame_index, params)
        frames.append(FrameRecord(
            frame_index=state.frame_index,
            frame_type=ftype,
            size=frame_size(state, ftype, params),
            timestamp=state.frame_index / params.fps,
        ))
    return frames


def stream_bitrate(frames: list[FrameRecord], window_s: float) -> float:
    """Mean bitrate in bits/s over frames with timestamp < window_s."""
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    total = sum(f.size for f in frames if f.timestamp < window_s)
    return total * 8 / window_s


def packetize(frame: FrameRecord, mtu_payload: int = DEFAULT_MTU_PAYLOAD,
              header_overhead: int = DEFAULT_HEADER_OVERHEAD) -> list[PacketChunk]:
    """Slice one frame into packets; all but the last carry a full payload."""
    if mtu_payload <= 0:
        raise ValueError("mtu_payload must be positive")
    count = max(1, math.ceil(frame.size / mtu_payload))
    chunks = []
    remaining = frame.size
    for _ in range(count):
        payload = min(mtu_payload, remaining)
        chunks.append(PacketChunk(payload, payload + header_overhead))
        remaining -= payload
    return chunks
