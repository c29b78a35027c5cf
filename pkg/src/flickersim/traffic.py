"""Traffic sources: the camera stream, constant background load, and the
five disruption benchmarks (echo roundtrips, one-way data probes, TCP and
UDP stress tests, a reliable file transfer)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from random import Random

from . import codec
from .codec import CodecParams, FrameRecord, encode_stream, frame_size, frame_type_for
from .netsim import Engine, Packet, PacketKind, RateLimiter, Verdict, rate_limit
from .scene import SceneProfile, SceneState, generate_scene
from .tcp import ACK_SIZE, Connection

# IPv4 fragments carry 1480 payload bytes behind IP(20) + Ethernet(14).
FRAGMENT_PAYLOAD = 1480
FRAGMENT_HEADERS = 34
ICMP_HEADER = 8
TCP_HEADER = 20
BASE_LOAD_DATAGRAM = 65_536
PROBE_TIMEOUT_S = 5.0
MAX_DATAGRAM_PAYLOAD = 65_507


class FlowKind(Enum):
    CAMERA_STREAM = "camera"
    BASE_LOAD_UDP = "base_load"
    ECHO_ROUNDTRIP = "echo"
    ONE_WAY_TCP_DATA = "oneway_tcp"
    TCP_STRESS = "tcp_stress"
    UDP_STRESS = "udp_stress"
    FILE_TRANSFER = "file_transfer"


def fragment_payloads(total_payload: int) -> list[int]:
    """IP payload sizes of the fragments carrying `total_payload` bytes."""
    count = max(1, math.ceil(total_payload / FRAGMENT_PAYLOAD))
    sizes = [FRAGMENT_PAYLOAD] * (count - 1)
    sizes.append(total_payload - FRAGMENT_PAYLOAD * (count - 1))
    return sizes


class Flow:
    """Base traffic source; subclasses implement timers and delivery."""

    kind: FlowKind

    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 start_s: float, stop_s: float, seed: int):
        self.flow_id = flow_id
        self.name = name
        self.src = src
        self.dst = dst
        self.start_s = start_s
        self.stop_s = stop_s
        self.rng = Random(seed)
        self.payload_bytes = 0
        self.bins: dict[int, int] = {}
        self.limiter: RateLimiter | None = None
        self.ingress_node: str | None = None

    def attach(self, eng: Engine) -> None:
        eng.register_flow(self)
        eng.network.require_path(self.src, self.dst)

    def emit_packet(self, eng: Engine, pkt: Packet) -> None:
        if self.limiter is not None and pkt.src == self.src:
            if rate_limit(pkt, self.limiter, eng.now) is Verdict.DROPPED:
                c = eng.counters[pkt.flow_id]
                c.emitted += 1
                c.emitted_bytes += pkt.size
                if eng.trace is not None:
                    eng.trace.append((eng.now, pkt.flow_id, pkt.id, "EMIT",
                                      pkt.src, pkt.size))
                eng.drop(pkt, self.ingress_node or pkt.src)
                return
        eng.emit(pkt)

    def on_inorder_bytes(self, eng: Engine, nbytes: int) -> None:
        idx = int(eng.now)
        self.bins[idx] = self.bins.get(idx, 0) + nbytes

    def on_timer(self, eng: Engine, tag) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def on_delivery(self, eng: Engine, pkt: Packet) -> None:
        if pkt.dst == self.dst:
            self.on_inorder_bytes(eng, pkt.payload)

    def on_drop(self, eng: Engine, pkt: Packet) -> None:
        pass

    def finalize(self, eng: Engine) -> None:
        pass


# An RTP payload that fits a 1500-byte MTU after RTP(12)+UDP(8)+IP(20),
# putting the camera's wire frames at the usual 1514 bytes.
CAMERA_MTU_PAYLOAD = 1460


class CameraFlow(Flow):
    """Variable- or constant-bitrate video source, GOP structured."""

    kind = FlowKind.CAMERA_STREAM

    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 duration_s: float, params: CodecParams, profile: SceneProfile,
                 seed: int, mtu_payload: int = CAMERA_MTU_PAYLOAD):
        super().__init__(flow_id, name, src, dst, 0.0, duration_s, seed)
        self.params = params
        self.profile = profile
        self.mtu_payload = mtu_payload
        self.frames: list[FrameRecord] = []
        self.media_bytes = 0

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        states = generate_scene(self.profile, self.stop_s, self.params.fps)
        self.frames = encode_stream(states, self.params)
        if self.frames:
            eng.schedule_timer(self.frames[0].timestamp, self, ("frame", 0))

    def on_timer(self, eng: Engine, tag) -> None:
        _, idx = tag
        frame = self.frames[idx]
        self.media_bytes += frame.size
        for k, chunk in enumerate(codec.packetize(frame, self.mtu_payload)):
            pkt = eng.new_packet(self.flow_id, chunk.wire_size, chunk.payload,
                                 PacketKind.VIDEO, self.src, self.dst,
                                 probe_id=frame.frame_index, frag_index=k)
            self.emit_packet(eng, pkt)
        if idx + 1 < len(self.frames):
            eng.schedule_timer(self.frames[idx + 1].timestamp, self,
                               ("frame", idx + 1))

    def mean_bitrate_bps(self, duration_s: float) -> float:
        return self.media_bytes * 8.0 / duration_s


class BaseLoadFlow(Flow):
    """Constant UDP background: 64 KB datagrams in 45 wire fragments."""

    kind = FlowKind.BASE_LOAD_UDP

    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 target_bps: float, start_s: float, stop_s: float, seed: int,
                 payload: int = BASE_LOAD_DATAGRAM):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed)
        self.target_bps = target_bps
        self.payload_bytes = payload
        self.frag_sizes = fragment_payloads(payload)
        self.datagrams_emitted = 0

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        if self.target_bps <= 0:
            return
        interval = self.payload_bytes * 8.0 / self.target_bps
        first = self.start_s + self.rng.uniform(0.0, interval)
        eng.schedule_timer(first, self, ("dgram", 0))

    def on_timer(self, eng: Engine, tag) -> None:
        _, i = tag
        self.datagrams_emitted += 1
        nfrags = len(self.frag_sizes)
        for k, payload in enumerate(self.frag_sizes):
            pkt = eng.new_packet(self.flow_id, payload + FRAGMENT_HEADERS, payload,
                                 PacketKind.BASE_LOAD, self.src, self.dst,
                                 probe_id=i, frag_index=k, frag_count=nfrags)
            self.emit_packet(eng, pkt)
        interval = self.payload_bytes * 8.0 / self.target_bps
        nxt = eng.now + interval
        if nxt <= self.stop_s:
            eng.schedule_timer(nxt, self, ("dgram", i + 1))


class _ProbeFlow(Flow):
    """Per-probe request/response bookkeeping shared by echo and one-way."""

    request_kind: PacketKind
    header_bytes: int

    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 payload: int, interval_s: float, start_s: float, stop_s: float,
                 seed: int):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed)
        self.payload_bytes = payload
        self.interval_s = interval_s
        self.frag_sizes = fragment_payloads(payload + self.header_bytes)
        self.emit_times: dict[int, float] = {}
        self.rtts_by_probe: dict[int, float] = {}
        self._req_frags: dict[int, int] = {}
        self._rsp_frags: dict[int, int] = {}

    def _schedule_probe(self, eng: Engine, i: int) -> None:
        # Fixed grid plus a small jitter so concurrent probe flows never
        # phase-lock with each other or with the camera's frame cadence.
        base = self.start_s + i * self.interval_s
        if base <= self.stop_s:
            eng.schedule_timer(base + self.rng.uniform(0, 0.2 * self.interval_s),
                               self, ("probe", i))

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        self._schedule_probe(eng, 0)

    def on_timer(self, eng: Engine, tag) -> None:
        _, i = tag
        self.emit_times[i] = eng.now
        nfrags = len(self.frag_sizes)
        for k, payload in enumerate(self.frag_sizes):
            pkt = eng.new_packet(self.flow_id, payload + FRAGMENT_HEADERS, payload,
                                 self.request_kind, self.src, self.dst,
                                 probe_id=i, frag_index=k, frag_count=nfrags)
            self.emit_packet(eng, pkt)
        self._schedule_probe(eng, i + 1)

    def _respond(self, eng: Engine, probe_id: int) -> None:
        raise NotImplementedError

    def _complete(self, eng: Engine, probe_id: int) -> None:
        if probe_id not in self.rtts_by_probe:
            self.rtts_by_probe[probe_id] = eng.now - self.emit_times[probe_id]

    def on_delivery(self, eng: Engine, pkt: Packet) -> None:
        if pkt.kind is self.request_kind and pkt.dst == self.dst:
            self.on_inorder_bytes(eng, pkt.payload)
            got = self._req_frags.get(pkt.probe_id, 0) + 1
            self._req_frags[pkt.probe_id] = got
            if got == pkt.frag_count:
                self._respond(eng, pkt.probe_id)

    # Probes the network never answered within the timeout count as dropped.
    def completed_probes(self) -> dict[int, float]:
        return {i: rtt for i, rtt in self.rtts_by_probe.items()
                if rtt <= PROBE_TIMEOUT_S}

    @property
    def probes_sent(self) -> int:
        return len(self.emit_times)


class EchoFlow(_ProbeFlow):
    """ICMP-style echo: the reply mirrors the request's size."""

    kind = FlowKind.ECHO_ROUNDTRIP
    request_kind = PacketKind.ECHO
    header_bytes = ICMP_HEADER

    def _respond(self, eng: Engine, probe_id: int) -> None:
        nfrags = len(self.frag_sizes)
        for k, payload in enumerate(self.frag_sizes):
            pkt = eng.new_packet(self.flow_id, payload + FRAGMENT_HEADERS, payload,
                                 PacketKind.ECHO_REPLY, self.dst, self.src,
                                 probe_id=probe_id, frag_index=k, frag_count=nfrags)
            self.emit_packet(eng, pkt)

    def on_delivery(self, eng: Engine, pkt: Packet) -> None:
        super().on_delivery(eng, pkt)
        if pkt.kind is PacketKind.ECHO_REPLY and pkt.dst == self.src:
            got = self._rsp_frags.get(pkt.probe_id, 0) + 1
            self._rsp_frags[pkt.probe_id] = got
            if got == pkt.frag_count:
                self._complete(eng, pkt.probe_id)


class OneWayTcpFlow(_ProbeFlow):
    """Standalone data segments acknowledged by a bare 54-byte ACK."""

    kind = FlowKind.ONE_WAY_TCP_DATA
    request_kind = PacketKind.DATA
    header_bytes = TCP_HEADER

    def _respond(self, eng: Engine, probe_id: int) -> None:
        pkt = eng.new_packet(self.flow_id, ACK_SIZE, 0, PacketKind.ACK,
                             self.dst, self.src, probe_id=probe_id)
        self.emit_packet(eng, pkt)

    def on_delivery(self, eng: Engine, pkt: Packet) -> None:
        super().on_delivery(eng, pkt)
        if pkt.kind is PacketKind.ACK and pkt.dst == self.src:
            self._complete(eng, pkt.probe_id)


class UdpStressFlow(Flow):
    """Blind constant-rate sender; `target_bps` counts wire bits."""

    kind = FlowKind.UDP_STRESS

    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 target_bps: float, start_s: float, stop_s: float, seed: int,
                 payload: int = 1460):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed)
        self.target_bps = target_bps
        self.payload_bytes = payload
        self.wire_size = payload + FRAGMENT_HEADERS + TCP_HEADER

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        if self.target_bps > 0:
            eng.schedule_timer(self.start_s, self, ("pkt", 0))

    def on_timer(self, eng: Engine, tag) -> None:
        _, i = tag
        pkt = eng.new_packet(self.flow_id, self.wire_size, self.payload_bytes,
                             PacketKind.STREAM, self.src, self.dst, seq=i)
        self.emit_packet(eng, pkt)
        # Exponential gaps around the target rate; a deterministic source
        # phase-locks with the bottleneck drain clock and its admission at
        # a full queue stops tracking offered shares.
        interval = self.wire_size * 8.0 / self.target_bps
        nxt = eng.now + self.rng.expovariate(1.0 / interval)
        if nxt <= self.stop_s:
            eng.schedule_timer(nxt, self, ("pkt", i + 1))


class _TcpFlowBase(Flow):
    def __init__(self, flow_id: int, name: str, src: str, dst: str,
                 start_s: float, stop_s: float, seed: int,
                 volume_bytes: int | None):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed)
        self.conn = Connection(self, src, dst, volume_bytes)
        self.payload_bytes = self.conn.mss

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        eng.schedule_timer(self.start_s, self, ("open",))

    def on_timer(self, eng: Engine, tag) -> None:
        if tag[0] == "open":
            self.conn.pump(eng)
        elif tag[0] == "rto":
            if eng.now <= self.stop_s:
                self.conn.on_rto(eng, tag[1])

    def on_delivery(self, eng: Engine, pkt: Packet) -> None:
        if pkt.kind is PacketKind.STREAM and pkt.dst == self.dst:
            self.conn.on_data(eng, pkt)
        elif pkt.kind is PacketKind.ACK and pkt.dst == self.src:
            if eng.now <= self.stop_s or self.conn.volume is not None:
                self.conn.on_ack(eng, pkt)


class TcpStressFlow(_TcpFlowBase):
    kind = FlowKind.TCP_STRESS

    def __init__(self, flow_id, name, src, dst, start_s, stop_s, seed):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed, None)


class FileTransferFlow(_TcpFlowBase):
    """Reliable transfer of a fixed volume; reports completion time."""

    kind = FlowKind.FILE_TRANSFER

    def __init__(self, flow_id, name, src, dst, start_s, stop_s, seed,
                 volume_bytes: int = 10_000_000):
        super().__init__(flow_id, name, src, dst, start_s, stop_s, seed,
                         volume_bytes)
        self.volume_bytes = volume_bytes

    def attach(self, eng: Engine) -> None:
        super().attach(eng)
        if self.volume_bytes == 0:
            self.conn.completed_at = self.start_s

    @property
    def completion_time_s(self) -> float | None:
        if self.conn.completed_at is None:
            return None
        return self.conn.completed_at - self.start_s

    @property
    def bytes_acknowledged(self) -> int:
        return self.conn.una
