"""Shipped scenario presets reproducing the evaluated grid.

Six base-load profiles (83.2/86.4/89.6 Mb/s wired, 22.4/25.6/28.8 Mb/s
wireless), stress and file-transfer benchmarks, and the three mitigation
variants.  Presets carry the attack switched on; paired runs derive the
attack-off twin from the same file and seed.
"""

from __future__ import annotations

WIRED_BASE_LOADS = (83.2, 86.4, 89.6)
WIRELESS_BASE_LOADS = (22.4, 25.6, 28.8)

WIRED_PROBE_PAYLOAD = 10000
WIRELESS_PROBE_PAYLOAD = 1400

_WIRED_TOPOLOGY = """\
[topology]
bottleneck_mbps = 100
bottleneck_queue_kib = 1024
"""

_WIRELESS_TOPOLOGY = """\
[topology]
channel_mbps = 98
ap_mbps = 250
ap_queue_kib = 1024
station_queue_kib = 64
nano_mbps = 8
fast_mbps = 40
viewer_downlink_mbps = 10
client_downlink_mbps = 60
"""

_CAMERA = """\
[camera]
fps = 60
gop_length = 120
i_size_base = 75000
p_size_base = 5000
attack_frame_size = 30000
mode = vbr
"""

_ATTACK_ON = """\
[attack]
enabled = true
h_angle_deg = 0
v_angle_deg = 0
flicker_hz = 240
"""


def _scenario(sid: str, topology: str, duration: float, seed: int = 1) -> str:
    return (f"[scenario]\nid = {sid}\ntopology = {topology}\n"
            f"duration_s = {duration:g}\nseed = {seed}\n")


def _probe_flows(payload: int, start: float, stop: float) -> str:
    return (f"[flow echo]\nkind = echo\npayload_bytes = {payload}\n"
            f"interval_ms = 100\nstart_s = {start:g}\nstop_s = {stop:g}\n\n"
            f"[flow oneway]\nkind = oneway_tcp\npayload_bytes = {payload}\n"
            f"interval_ms = 100\nstart_s = {start:g}\nstop_s = {stop:g}\n")


def _probe_preset(sid: str, topology: str, base_load: float, payload: int,
                  mitigations: str = "") -> str:
    topo = _WIRELESS_TOPOLOGY if topology == "wireless" else _WIRED_TOPOLOGY
    parts = [
        _scenario(sid, topology, 42),
        topo,
        _CAMERA,
        _ATTACK_ON,
        f"[base_load]\nmbps = {base_load:g}\n",
    ]
    if mitigations:
        parts.append(mitigations)
    parts.append(_probe_flows(payload, 2.0, 36.0))
    return "\n".join(parts)


def _stress_preset(topology: str, base_load: float, proto: str) -> str:
    sid = f"{topology}-stress-{proto}-{base_load:g}"
    topo = _WIRELESS_TOPOLOGY if topology == "wireless" else _WIRED_TOPOLOGY
    if proto == "udp":
        flow = ("[flow stress]\nkind = udp_stress\ntarget_mbps = 100\n"
                "start_s = 1\nstop_s = 61\n")
    else:
        flow = "[flow stress]\nkind = tcp_stress\nstart_s = 1\nstop_s = 61\n"
    return "\n".join([
        _scenario(sid, topology, 62),
        topo,
        _CAMERA,
        _ATTACK_ON,
        f"[base_load]\nmbps = {base_load:g}\n",
        flow,
    ])


def _file_preset(base_load: float) -> str:
    sid = f"wired-file-{base_load:g}"
    return "\n".join([
        _scenario(sid, "wired", 45),
        _WIRED_TOPOLOGY,
        _CAMERA,
        _ATTACK_ON,
        f"[base_load]\nmbps = {base_load:g}\n",
        "[flow transfer]\nkind = file_transfer\nvolume_bytes = 10000000\n"
        "start_s = 1\nstop_s = 44\n",
    ])


def _build_presets() -> dict[str, str]:
    presets: dict[str, str] = {}
    for load in WIRED_BASE_LOADS:
        name = f"wired-probes-{load:g}"
        presets[name] = _probe_preset(name, "wired", load, WIRED_PROBE_PAYLOAD)
    for load in WIRELESS_BASE_LOADS:
        name = f"wireless-probes-{load:g}"
        presets[name] = _probe_preset(name, "wireless", load,
                                      WIRELESS_PROBE_PAYLOAD)
    for proto in ("tcp", "udp"):
        presets[f"wired-stress-{proto}-89.6"] = _stress_preset(
            "wired", 89.6, proto)
        presets[f"wireless-stress-{proto}-22.4"] = _stress_preset(
            "wireless", 22.4, proto)
    presets["wired-file-89.6"] = _file_preset(89.6)
    presets["wired-probes-89.6-ratelimit"] = _probe_preset(
        "wired-probes-89.6-ratelimit", "wired", 89.6, WIRED_PROBE_PAYLOAD,
        mitigations="[mitigations]\nrate_limit_mbps = 4\n")
    presets["wired-probes-89.6-cbr"] = _probe_preset(
        "wired-probes-89.6-cbr", "wired", 89.6, WIRED_PROBE_PAYLOAD,
        mitigations="[mitigations]\ncbr = true\n")
    presets["wired-segmented-probes-89.6"] = _probe_preset(
        "wired-segmented-probes-89.6", "wired_segmented", 89.6,
        WIRED_PROBE_PAYLOAD)
    return presets


PRESETS = _build_presets()
