"""Builds the simulated networks for the three testbed layouts.

Wired: sender hosts feed switch A, receivers hang off switch B, and the
single A-to-B trunk is the port the attack aims to overload.  Wireless:
everything shares one access point's half-duplex channel, with the
camera cabled into the access point's Ethernet side and its transmission
queue as the stressed resource.  The segmented variant moves the camera
and viewer onto a physically separate switch pair.
"""

from __future__ import annotations

from .config import ScenarioConfig, Topology
from .netsim import Channel, Network

KIB = 1024

EDGE_CAPACITY_BPS = 100e6
EDGE_QUEUE_BYTES = 512 * KIB
EDGE_PROP_S = 1e-5
CRIT_EDGE_JITTER_S = 3.5e-4
BASE_EDGE_JITTER_S = 8e-3
CAMERA_EDGE_JITTER_S = 5e-3
TRUNK_PROP_S = 5e-5
CAMERA_AP_LINK_BPS = 100e6
CAMERA_AP_QUEUE_BYTES = 256 * KIB
FAST_STATION_QUEUE_BYTES = 256 * KIB

CAMERA = "camera"
VIEWER = "viewer"
BASE_SRC = "base_src"
BASE_DST = "base_dst"
CRIT_SRC = "crit_src"
CRIT_DST = "crit_dst"
SW_A = "sw_a"
SW_B = "sw_b"
CAM_SW_A = "cam_sw_a"
CAM_SW_B = "cam_sw_b"
AP = "ap"

WIRED_HOSTS_A = (CAMERA, BASE_SRC, CRIT_SRC)
WIRED_HOSTS_B = (VIEWER, BASE_DST, CRIT_DST)
NANO_STATIONS = (VIEWER, CRIT_SRC, CRIT_DST, BASE_DST)


def build_network(config: ScenarioConfig) -> tuple[Network, str]:
    """Returns the network and the node acting as the camera's ingress port."""
    if config.topology is Topology.WIRELESS:
        return _build_wireless(config)
    return _build_wired(config, segmented=config.topology is Topology.WIRED_SEGMENTED)


def _build_wired(config: ScenarioConfig, segmented: bool) -> tuple[Network, str]:
    p = config.wired
    net = Network()
    for name in WIRED_HOSTS_A + WIRED_HOSTS_B + (SW_A, SW_B):
        net.add_node(name)
    trunk_bps = p.bottleneck_mbps * 1e6
    trunk_queue = p.bottleneck_queue_kib * KIB
    net.add_duplex_link(SW_A, SW_B, trunk_bps, TRUNK_PROP_S, trunk_queue)
    net.add_duplex_link(BASE_SRC, SW_A, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                        EDGE_QUEUE_BYTES, jitter_s=BASE_EDGE_JITTER_S)
    net.add_duplex_link(CRIT_SRC, SW_A, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                        EDGE_QUEUE_BYTES, jitter_s=CRIT_EDGE_JITTER_S)
    for host in (BASE_DST, CRIT_DST):
        net.add_duplex_link(host, SW_B, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                            EDGE_QUEUE_BYTES, jitter_s=CRIT_EDGE_JITTER_S)
    if segmented:
        # Dedicated switch pair for the video path; the trunk never sees it.
        net.add_node(CAM_SW_A)
        net.add_node(CAM_SW_B)
        net.add_duplex_link(CAMERA, CAM_SW_A, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                            EDGE_QUEUE_BYTES, jitter_s=CAMERA_EDGE_JITTER_S)
        net.add_duplex_link(CAM_SW_A, CAM_SW_B, trunk_bps, TRUNK_PROP_S,
                            trunk_queue)
        net.add_duplex_link(VIEWER, CAM_SW_B, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                            EDGE_QUEUE_BYTES)
        ingress = CAM_SW_A
    else:
        net.add_duplex_link(CAMERA, SW_A, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                            EDGE_QUEUE_BYTES, jitter_s=CAMERA_EDGE_JITTER_S)
        net.add_duplex_link(VIEWER, SW_B, EDGE_CAPACITY_BPS, EDGE_PROP_S,
                            EDGE_QUEUE_BYTES, jitter_s=CRIT_EDGE_JITTER_S)
        ingress = SW_A
    net.compute_routes()
    return net, ingress


def _build_wireless(config: ScenarioConfig) -> tuple[Network, str]:
    p = config.wireless
    net = Network()
    for name in (AP, CAMERA, VIEWER, CRIT_SRC, CRIT_DST, BASE_SRC, BASE_DST):
        net.add_node(name)
    channel = Channel("air", ap=AP, aggregate_bps=p.channel_mbps * 1e6)
    channel.add_station(AP, p.ap_mbps * 1e6, p.ap_queue_kib * KIB)
    for name in NANO_STATIONS:
        downlink = (p.viewer_downlink_mbps if name == VIEWER
                    else p.client_downlink_mbps) * 1e6
        channel.add_station(name, p.nano_mbps * 1e6, p.station_queue_kib * KIB,
                            downlink_bps=downlink)
    channel.add_station(BASE_SRC, p.fast_mbps * 1e6, FAST_STATION_QUEUE_BYTES,
                        downlink_bps=p.client_downlink_mbps * 1e6)
    net.set_channel(channel)
    net.add_duplex_link(CAMERA, AP, CAMERA_AP_LINK_BPS, EDGE_PROP_S,
                        CAMERA_AP_QUEUE_BYTES)
    net.compute_routes()
    return net, AP
