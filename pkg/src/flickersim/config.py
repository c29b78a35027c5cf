"""Scenario configuration: a strict line-oriented format.

Sections are `[name]` headers over `key = value` pairs.  Unknown
sections or keys are rejected, as are duplicates; every parse error
carries a line number and every invariant violation names its field.
Capacities and durations are deliberately explicit in the file rather
than defaulted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .codec import CodecMode, CodecParams
from .traffic import FlowKind, MAX_DATAGRAM_PAYLOAD


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Topology(Enum):
    WIRED = "wired"
    WIRELESS = "wireless"
    WIRED_SEGMENTED = "wired_segmented"


@dataclass(frozen=True)
class AttackConfig:
    enabled: bool = False
    h_angle_deg: float = 0.0
    v_angle_deg: float = 0.0
    flicker_hz: float = 240.0


@dataclass(frozen=True)
class Mitigations:
    rate_limit_mbps: float | None = None
    cbr: bool = False


@dataclass(frozen=True)
class WiredParams:
    bottleneck_mbps: float
    bottleneck_queue_kib: int


@dataclass(frozen=True)
class WirelessParams:
    channel_mbps: float
    ap_mbps: float
    ap_queue_kib: int
    station_queue_kib: int
    nano_mbps: float
    fast_mbps: float
    viewer_downlink_mbps: float
    client_downlink_mbps: float


@dataclass(frozen=True)
class FlowSpec:
    name: str
    kind: FlowKind
    source: str
    sink: str
    payload_size: int = 1400
    target_rate_bps: float = 0.0
    volume_bytes: int = 10_000_000
    start_s: float = 1.0
    stop_s: float = 0.0
    interval_s: float = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    topology: Topology
    duration_s: float
    seed: int
    camera: CodecParams
    attack: AttackConfig
    base_load_mbps: float
    mitigations: Mitigations
    flows: tuple[FlowSpec, ...]
    wired: WiredParams | None = None
    wireless: WirelessParams | None = None


_DEFAULT_ENDPOINTS = {
    FlowKind.CAMERA_STREAM: ("camera", "viewer"),
    FlowKind.BASE_LOAD_UDP: ("base_src", "base_dst"),
    FlowKind.ECHO_ROUNDTRIP: ("crit_src", "crit_dst"),
    FlowKind.ONE_WAY_TCP_DATA: ("crit_src", "crit_dst"),
    FlowKind.TCP_STRESS: ("crit_src", "crit_dst"),
    FlowKind.UDP_STRESS: ("crit_src", "crit_dst"),
    FlowKind.FILE_TRANSFER: ("crit_src", "crit_dst"),
}

_DATAGRAM_KINDS = {FlowKind.ECHO_ROUNDTRIP, FlowKind.ONE_WAY_TCP_DATA,
                   FlowKind.BASE_LOAD_UDP}

_SCENARIO_KEYS = {"id", "topology", "duration_s", "seed"}
_TOPOLOGY_KEYS = {"bottleneck_mbps", "bottleneck_queue_kib", "channel_mbps",
                  "ap_mbps", "ap_queue_kib", "station_queue_kib", "nano_mbps",
                  "fast_mbps", "viewer_downlink_mbps", "client_downlink_mbps"}
_CAMERA_KEYS = {"fps", "gop_length", "i_size_base", "p_size_base",
                "attack_frame_size", "mode", "cbr_target_bps"}
_ATTACK_KEYS = {"enabled", "h_angle_deg", "v_angle_deg", "flicker_hz"}
_BASE_LOAD_KEYS = {"mbps"}
_MITIGATION_KEYS = {"rate_limit_mbps", "cbr"}
_FLOW_KEYS = {"kind", "source", "sink", "payload_bytes", "target_mbps",
              "volume_bytes", "start_s", "stop_s", "interval_ms"}

_FLOW_KIND_NAMES = {k.value: k for k in FlowKind}


def _parse_sections(text: str) -> list[tuple[str, dict[str, tuple[str, int]], int]]:
    sections: list[tuple[str, dict[str, tuple[str, int]], int]] = []
    current: dict[str, tuple[str, int]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", lineno)
            name = line[1:-1].strip()
            if not name:
                raise ConfigError("empty section name", lineno)
            current = {}
            sections.append((name, current, lineno))
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        current[key] = (value, lineno)
    return sections


def _take(section: dict, key: str, conv, default=None, required: bool = False,
          section_name: str = ""):
    if key not in section:
        if required:
            raise ConfigError(f"[{section_name}] missing required key {key!r}")
        return default
    value, lineno = section.pop(key)
    try:
        return conv(value)
    except ConfigError:
        raise
    except Exception:
        raise ConfigError(f"invalid value for {key!r}: {value!r}", lineno)


def _bool(value: str) -> bool:
    if value.lower() in ("true", "yes", "1", "on"):
        return True
    if value.lower() in ("false", "no", "0", "off"):
        return False
    raise ValueError(value)


def _reject_unknown(name: str, section: dict, allowed: set[str]) -> None:
    for key, (_, lineno) in section.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{name}]", lineno)


def parse_scenario(text: str) -> ScenarioConfig:
    sections = _parse_sections(text)
    seen: dict[str, dict] = {}
    flow_sections: list[tuple[str, dict, int]] = []
    for name, body, lineno in sections:
        if name.startswith("flow"):
            flow_name = name[4:].strip()
            if not flow_name:
                raise ConfigError("flow section needs a name: [flow NAME]", lineno)
            if any(fn == flow_name for fn, _, _ in flow_sections):
                raise ConfigError(f"duplicate flow name {flow_name!r}", lineno)
            flow_sections.append((flow_name, body, lineno))
            continue
        if name not in ("scenario", "topology", "camera", "attack", "base_load",
                        "mitigations"):
            raise ConfigError(f"unknown section [{name}]", lineno)
        if name in seen:
            raise ConfigError(f"duplicate section [{name}]", lineno)
        seen[name] = body

    if "scenario" not in seen:
        raise ConfigError("missing [scenario] section")
    sc = seen["scenario"]
    _reject_unknown("scenario", dict(sc), _SCENARIO_KEYS)
    scenario_id = _take(sc, "id", str, required=True, section_name="scenario")
    topo_name = _take(sc, "topology", str, required=True, section_name="scenario")
    try:
        topology = Topology(topo_name)
    except ValueError:
        raise ConfigError(f"topology must be one of "
                          f"{[t.value for t in Topology]}, got {topo_name!r}")
    duration_s = _take(sc, "duration_s", float, required=True,
                       section_name="scenario")
    seed = _take(sc, "seed", int, required=True, section_name="scenario")
    if duration_s <= 0:
        raise ConfigError("duration_s must be positive")

    if "topology" not in seen:
        raise ConfigError("missing [topology] section")
    tp = seen["topology"]
    _reject_unknown("topology", dict(tp), _TOPOLOGY_KEYS)
    wired = wireless = None
    if topology in (Topology.WIRED, Topology.WIRED_SEGMENTED):
        wired = WiredParams(
            bottleneck_mbps=_take(tp, "bottleneck_mbps", float, required=True,
                                  section_name="topology"),
            bottleneck_queue_kib=_take(tp, "bottleneck_queue_kib", int,
                                       required=True, section_name="topology"),
        )
        if wired.bottleneck_mbps <= 0:
            raise ConfigError("bottleneck_mbps must be positive")
        if wired.bottleneck_queue_kib <= 0:
            raise ConfigError("bottleneck_queue_kib must be positive")
        capacity_mbps = wired.bottleneck_mbps
    else:
        wireless = WirelessParams(
            channel_mbps=_take(tp, "channel_mbps", float, required=True,
                               section_name="topology"),
            ap_mbps=_take(tp, "ap_mbps", float, required=True,
                          section_name="topology"),
            ap_queue_kib=_take(tp, "ap_queue_kib", int, required=True,
                               section_name="topology"),
            station_queue_kib=_take(tp, "station_queue_kib", int, required=True,
                                    section_name="topology"),
            nano_mbps=_take(tp, "nano_mbps", float, required=True,
                            section_name="topology"),
            fast_mbps=_take(tp, "fast_mbps", float, required=True,
                            section_name="topology"),
            viewer_downlink_mbps=_take(tp, "viewer_downlink_mbps", float,
                                       required=True, section_name="topology"),
            client_downlink_mbps=_take(tp, "client_downlink_mbps", float,
                                       required=True, section_name="topology"),
        )
        for fname in ("channel_mbps", "ap_mbps", "ap_queue_kib",
                      "station_queue_kib", "nano_mbps", "fast_mbps",
                      "viewer_downlink_mbps", "client_downlink_mbps"):
            if getattr(wireless, fname) <= 0:
                raise ConfigError(f"{fname} must be positive")
        capacity_mbps = wireless.channel_mbps
    if tp:
        key, (_, lineno) = next(iter(tp.items()))
        raise ConfigError(
            f"key {key!r} does not apply to topology {topology.value!r}", lineno)

    cam = seen.get("camera", {})
    _reject_unknown("camera", dict(cam), _CAMERA_KEYS)
    mode_name = _take(cam, "mode", str, default="vbr")
    try:
        mode = CodecMode(mode_name)
    except ValueError:
        raise ConfigError(f"camera mode must be 'vbr' or 'cbr', got {mode_name!r}")
    try:
        camera = CodecParams(
            fps=_take(cam, "fps", int, default=60),
            gop_length=_take(cam, "gop_length", int, default=120),
            i_size_base=_take(cam, "i_size_base", int, default=75_000),
            p_size_base=_take(cam, "p_size_base", int, default=5_000),
            attack_frame_size=_take(cam, "attack_frame_size", int, default=30_000),
            mode=mode,
            cbr_target_bps=_take(cam, "cbr_target_bps", float, default=2_500_000.0),
        )
    except ValueError as exc:
        raise ConfigError(f"camera: {exc}")

    atk = seen.get("attack", {})
    _reject_unknown("attack", dict(atk), _ATTACK_KEYS)
    attack = AttackConfig(
        enabled=_take(atk, "enabled", _bool, default=False),
        h_angle_deg=_take(atk, "h_angle_deg", float, default=0.0),
        v_angle_deg=_take(atk, "v_angle_deg", float, default=0.0),
        flicker_hz=_take(atk, "flicker_hz", float, default=240.0),
    )
    for fname in ("h_angle_deg", "v_angle_deg"):
        if not -90.0 <= getattr(attack, fname) <= 90.0:
            raise ConfigError(f"{fname} must lie in [-90, 90]")
    if attack.enabled and attack.flicker_hz < 2 * camera.fps:
        raise ConfigError("flicker_hz must be at least twice the camera fps")

    bl = seen.get("base_load", {})
    _reject_unknown("base_load", dict(bl), _BASE_LOAD_KEYS)
    base_load_mbps = _take(bl, "mbps", float, default=0.0)
    if base_load_mbps != 0.0 and not 1.0 <= base_load_mbps <= capacity_mbps:
        raise ConfigError(
            f"base_load_mbps must be 0 or within [1, {capacity_mbps:g}] "
            f"(link capacity), got {base_load_mbps:g}")

    mit = seen.get("mitigations", {})
    _reject_unknown("mitigations", dict(mit), _MITIGATION_KEYS)
    mitigations = Mitigations(
        rate_limit_mbps=_take(mit, "rate_limit_mbps", float, default=None),
        cbr=_take(mit, "cbr", _bool, default=False),
    )
    if mitigations.rate_limit_mbps is not None and mitigations.rate_limit_mbps <= 0:
        raise ConfigError("rate_limit_mbps must be positive")
    if mitigations.cbr:
        camera = replace(camera, mode=CodecMode.CONSTANT_BITRATE)

    flows = []
    for flow_name, body, lineno in flow_sections:
        _reject_unknown(f"flow {flow_name}", dict(body), _FLOW_KEYS)
        kind_name = _take(body, "kind", str, required=True,
                          section_name=f"flow {flow_name}")
        kind = _FLOW_KIND_NAMES.get(kind_name)
        if kind is None:
            raise ConfigError(
                f"unknown flow kind {kind_name!r}; expected one of "
                f"{sorted(_FLOW_KIND_NAMES)}", lineno)
        if kind is FlowKind.CAMERA_STREAM:
            raise ConfigError("the camera flow is implicit; do not declare it",
                              lineno)
        default_src, default_dst = _DEFAULT_ENDPOINTS[kind]
        spec = FlowSpec(
            name=flow_name,
            kind=kind,
            source=_take(body, "source", str, default=default_src),
            sink=_take(body, "sink", str, default=default_dst),
            payload_size=_take(body, "payload_bytes", int, default=1400),
            target_rate_bps=_take(body, "target_mbps", float, default=0.0) * 1e6,
            volume_bytes=_take(body, "volume_bytes", int, default=10_000_000),
            start_s=_take(body, "start_s", float, default=1.0),
            stop_s=_take(body, "stop_s", float, default=max(duration_s - 1.0, 0.5)),
            interval_s=_take(body, "interval_ms", float, default=100.0) / 1000.0,
        )
        _validate_flow(spec, duration_s)
        flows.append(spec)

    return ScenarioConfig(
        scenario_id=scenario_id, topology=topology, duration_s=duration_s,
        seed=seed, camera=camera, attack=attack, base_load_mbps=base_load_mbps,
        mitigations=mitigations, flows=tuple(flows), wired=wired,
        wireless=wireless)


def _validate_flow(spec: FlowSpec, duration_s: float) -> None:
    prefix = f"flow {spec.name}:"
    if spec.start_s >= spec.stop_s:
        raise ConfigError(f"{prefix} start_s must precede stop_s")
    if spec.stop_s > duration_s:
        raise ConfigError(f"{prefix} stop_s exceeds scenario duration_s")
    if spec.kind in _DATAGRAM_KINDS and spec.payload_size > MAX_DATAGRAM_PAYLOAD:
        raise ConfigError(
            f"{prefix} payload_bytes exceeds {MAX_DATAGRAM_PAYLOAD} "
            f"for datagram kinds")
    if spec.payload_size <= 0:
        raise ConfigError(f"{prefix} payload_bytes must be positive")
    if spec.interval_s <= 0:
        raise ConfigError(f"{prefix} interval_ms must be positive")
    if spec.kind is FlowKind.UDP_STRESS and spec.target_rate_bps <= 0:
        raise ConfigError(f"{prefix} target_mbps required for udp_stress")
    if spec.volume_bytes < 0:
        raise ConfigError(f"{prefix} volume_bytes must be non-negative")


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def serialize_scenario(config: ScenarioConfig) -> str:
    """Canonical text form; parse(serialize(c)) == c."""
    out = []
    out.append("[scenario]")
    out.append(f"id = {config.scenario_id}")
    out.append(f"topology = {config.topology.value}")
    out.append(f"duration_s = {config.duration_s:g}")
    out.append(f"seed = {config.seed}")
    out.append("")
    out.append("[topology]")
    if config.wired is not None:
        out.append(f"bottleneck_mbps = {config.wired.bottleneck_mbps:g}")
        out.append(f"bottleneck_queue_kib = {config.wired.bottleneck_queue_kib}")
    else:
        w = config.wireless
        out.append(f"channel_mbps = {w.channel_mbps:g}")
        out.append(f"ap_mbps = {w.ap_mbps:g}")
        out.append(f"ap_queue_kib = {w.ap_queue_kib}")
        out.append(f"station_queue_kib = {w.station_queue_kib}")
        out.append(f"nano_mbps = {w.nano_mbps:g}")
        out.append(f"fast_mbps = {w.fast_mbps:g}")
        out.append(f"viewer_downlink_mbps = {w.viewer_downlink_mbps:g}")
        out.append(f"client_downlink_mbps = {w.client_downlink_mbps:g}")
    out.append("")
    out.append("[camera]")
    cam = config.camera
    out.append(f"fps = {cam.fps}")
    out.append(f"gop_length = {cam.gop_length}")
    out.append(f"i_size_base = {cam.i_size_base}")
    out.append(f"p_size_base = {cam.p_size_base}")
    out.append(f"attack_frame_size = {cam.attack_frame_size}")
    out.append(f"mode = {cam.mode.value}")
    out.append(f"cbr_target_bps = {cam.cbr_target_bps:g}")
    out.append("")
    out.append("[attack]")
    out.append(f"enabled = {'true' if config.attack.enabled else 'false'}")
    out.append(f"h_angle_deg = {config.attack.h_angle_deg:g}")
    out.append(f"v_angle_deg = {config.attack.v_angle_deg:g}")
    out.append(f"flicker_hz = {config.attack.flicker_hz:g}")
    out.append("")
    out.append("[base_load]")
    out.append(f"mbps = {config.base_load_mbps:g}")
    if config.mitigations.rate_limit_mbps is not None or config.mitigations.cbr:
        out.append("")
        out.append("[mitigations]")
        if config.mitigations.rate_limit_mbps is not None:
            out.append(f"rate_limit_mbps = {config.mitigations.rate_limit_mbps:g}")
        if config.mitigations.cbr:
            out.append("cbr = true")
    for spec in config.flows:
        out.append("")
        out.append(f"[flow {spec.name}]")
        out.append(f"kind = {spec.kind.value}")
        out.append(f"source = {spec.source}")
        out.append(f"sink = {spec.sink}")
        out.append(f"payload_bytes = {spec.payload_size}")
        if spec.target_rate_bps:
            out.append(f"target_mbps = {spec.target_rate_bps / 1e6:g}")
        if spec.kind is FlowKind.FILE_TRANSFER:
            out.append(f"volume_bytes = {spec.volume_bytes}")
        out.append(f"start_s = {spec.start_s:g}")
        out.append(f"stop_s = {spec.stop_s:g}")
        out.append(f"interval_ms = {spec.interval_s * 1000.0:g}")
    return "\n".join(out) + "\n"
