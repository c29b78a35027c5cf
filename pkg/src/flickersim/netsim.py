"""Deterministic discrete-event network engine.

Models directed links with tail-drop FIFO byte queues, a half-duplex
shared wireless channel served by airtime-weighted deficit round-robin,
and token-bucket ingress rate limiting.  One engine instance is strictly
single-threaded; events are processed in (time, sequence) order, so a
run is a pure function of its inputs.
"""

from __future__ import annotations

import heapq
import zlib
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from random import Random

MAX_DATAGRAM = 65_535

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class PacketKind(IntEnum):
    VIDEO = 0
    BASE_LOAD = 1
    ECHO = 2
    ECHO_REPLY = 3
    DATA = 4
    ACK = 5
    STREAM = 6


class EventKind(IntEnum):
    PACKET_ARRIVAL = 0
    TRANSMISSION_COMPLETE = 1
    TIMER_FIRE = 2
    FRAME_EMIT = 3


class Duplex(Enum):
    FULL = "full"
    SHARED_HALF = "shared_half"


class Verdict(Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


class Packet:
    __slots__ = ("id", "flow_id", "size", "payload", "created_at", "kind", "src",
                 "dst", "probe_id", "frag_index", "frag_count", "seq", "ack_seq",
                 "retransmitted")

    def __init__(self, pid: int, flow_id: int, size: int, payload: int,
                 created_at: float, kind: PacketKind, src: str, dst: str,
                 probe_id: int = -1, frag_index: int = 0, frag_count: int = 1,
                 seq: int = -1, ack_seq: int = -1, retransmitted: bool = False):
        self.id = pid
        self.flow_id = flow_id
        self.size = size
        self.payload = payload
        self.created_at = created_at
        self.kind = kind
        self.src = src
        self.dst = dst
        self.probe_id = probe_id
        self.frag_index = frag_index
        self.frag_count = frag_count
        self.seq = seq
        self.ack_seq = ack_seq
        self.retransmitted = retransmitted


@dataclass
class QueueState:
    occupancy_bytes: int = 0
    enqueues_total: int = 0
    drops_total: int = 0
    dequeues_total: int = 0


@dataclass
class FlowCounters:
    emitted: int = 0
    delivered: int = 0
    dropped: int = 0
    emitted_bytes: int = 0
    delivered_bytes: int = 0
    dropped_bytes: int = 0


@dataclass
class RateLimiter:
    """Token bucket; tokens are bytes, replenished at `rate_bps`."""

    rate_bps: float
    burst_bytes: int
    tokens: float = field(default=-1.0)
    last_refill: float = 0.0

    def __post_init__(self) -> None:
        if self.tokens < 0:
            self.tokens = float(self.burst_bytes)


def rate_limit(packet: Packet, limiter: RateLimiter, now: float) -> Verdict:
    """Token-bucket admission: pass iff a full packet's worth of tokens is up."""
    elapsed = now - limiter.last_refill
    if elapsed > 0:
        limiter.tokens = min(float(limiter.burst_bytes),
                             limiter.tokens + limiter.rate_bps / 8.0 * elapsed)
        limiter.last_refill = now
    if limiter.tokens >= packet.size:
        limiter.tokens -= packet.size
        return Verdict.ACCEPTED
    return Verdict.DROPPED


class Link:
    """Directed link with a tail-drop FIFO byte queue at its head end.

    `jitter_s`, when set, adds a small uniform forwarding delay per packet
    (host NIC and hypervisor scheduling noise); it keeps arrival phases of
    independent senders decorrelated.  Each link draws from its own seeded
    stream so that disjoint paths stay reproducible independently.
    """

    __slots__ = ("name", "src", "dst", "capacity_bps", "prop_delay_s",
                 "queue_capacity", "duplex", "jitter_s", "rng", "queue",
                 "busy", "state")

    def __init__(self, name: str, src: str, dst: str, capacity_bps: float,
                 prop_delay_s: float, queue_capacity: int,
                 duplex: Duplex = Duplex.FULL, jitter_s: float = 0.0):
        if capacity_bps <= 0:
            raise ValueError("link capacity must be positive")
        self.name = name
        self.src = src
        self.dst = dst
        self.capacity_bps = capacity_bps
        self.prop_delay_s = prop_delay_s
        self.queue_capacity = queue_capacity
        self.duplex = duplex
        self.jitter_s = jitter_s
        self.rng: Random | None = None
        self.queue: deque[Packet] = deque()
        self.busy = False
        self.state = QueueState()

    def enqueue(self, eng: Engine, pkt: Packet) -> Verdict:
        st = self.state
        st.enqueues_total += 1
        if st.occupancy_bytes + pkt.size > self.queue_capacity:
            st.drops_total += 1
            eng.drop(pkt, self.src)
            return Verdict.DROPPED
        st.occupancy_bytes += pkt.size
        self.queue.append(pkt)
        if eng.trace is not None:
            eng.trace.append((eng.now, pkt.flow_id, pkt.id, "ENQ", self.src, pkt.size))
        if not self.busy:
            self._start(eng)
        return Verdict.ACCEPTED

    def _start(self, eng: Engine) -> None:
        pkt = self.queue[0]
        self.busy = True
        eng.schedule(eng.now + pkt.size * 8.0 / self.capacity_bps,
                     EventKind.TRANSMISSION_COMPLETE, self)

    def on_tx_complete(self, eng: Engine) -> None:
        pkt = self.queue.popleft()
        st = self.state
        st.occupancy_bytes -= pkt.size
        st.dequeues_total += 1
        delay = self.prop_delay_s
        if self.rng is not None:
            delay += self.rng.uniform(0.0, self.jitter_s)
        eng.schedule(eng.now + delay, EventKind.PACKET_ARRIVAL, self.dst, pkt)
        if self.queue:
            self._start(eng)
        else:
            self.busy = False


class Station:
    """One transmitter on a shared half-duplex channel.

    `cap_bps` is the station's own transmission rate (and its scheduling
    weight); `downlink_bps` is the rate the access point achieves when
    transmitting *to* this station, which for a slow adapter is what
    turns a fat stream into airtime exhaustion.
    """

    __slots__ = ("node", "channel", "cap_bps", "downlink_bps",
                 "queue_capacity", "queue", "state", "deficit", "active")

    def __init__(self, node: str, channel: Channel, cap_bps: float,
                 queue_capacity: int, downlink_bps: float | None = None):
        self.node = node
        self.channel = channel
        self.cap_bps = cap_bps
        self.downlink_bps = downlink_bps
        self.queue_capacity = queue_capacity
        self.queue: deque[Packet] = deque()
        self.state = QueueState()
        self.deficit = 0.0
        self.active = False

    def enqueue(self, eng: Engine, pkt: Packet) -> Verdict:
        return self.channel.enqueue(eng, self, pkt)


class Channel:
    """Half-duplex shared medium; one packet in flight at a time.

    Service is deficit round-robin over non-empty station queues with
    quanta proportional to the stations' rate caps, measured in airtime,
    so backlogged stations share airtime in proportion to their caps.  A
    station transmits at min(cap, aggregate) while it holds the medium;
    traffic relayed by the access point occupies the medium twice.
    """

    QUANTUM_S_PER_BPS = 2.5e-11

    def __init__(self, name: str, ap: str, aggregate_bps: float,
                 prop_delay_s: float = 5e-6):
        self.name = name
        self.ap = ap
        self.aggregate_bps = aggregate_bps
        self.prop_delay_s = prop_delay_s
        self.stations: dict[str, Station] = {}
        self.active: deque[Station] = deque()
        self.busy = False
        self.current: Station | None = None
        self.busy_time_by_flow: dict[int, float] = {}

    def add_station(self, node: str, cap_bps: float, queue_capacity: int,
                    downlink_bps: float | None = None) -> Station:
        st = Station(node, self, cap_bps, queue_capacity, downlink_bps)
        self.stations[node] = st
        return st

    def enqueue(self, eng: Engine, station: Station, pkt: Packet) -> Verdict:
        qs = station.state
        qs.enqueues_total += 1
        if qs.occupancy_bytes + pkt.size > station.queue_capacity:
            qs.drops_total += 1
            eng.drop(pkt, station.node)
            return Verdict.DROPPED
        qs.occupancy_bytes += pkt.size
        station.queue.append(pkt)
        if eng.trace is not None:
            eng.trace.append((eng.now, pkt.flow_id, pkt.id, "ENQ", station.node, pkt.size))
        if not station.active:
            station.active = True
            self.active.append(station)
        if not self.busy:
            self._start_next(eng)
        return Verdict.ACCEPTED

    def _tx_rate(self, station: Station, pkt: Packet) -> float:
        rate = min(station.cap_bps, self.aggregate_bps)
        if station.node == self.ap:
            dest = self.stations.get(pkt.dst)
            if dest is not None and dest.downlink_bps is not None:
                rate = min(rate, dest.downlink_bps)
        return rate

    def _airtime(self, station: Station, pkt: Packet) -> float:
        return pkt.size * 8.0 / self._tx_rate(station, pkt)

    def _start_next(self, eng: Engine) -> None:
        active = self.active
        while active:
            st = active[0]
            need = self._airtime(st, st.queue[0])
            if st.deficit >= need:
                st.deficit -= need
                self.current = st
                self.busy = True
                eng.schedule(eng.now + need, EventKind.TRANSMISSION_COMPLETE, self)
                return
            st.deficit += st.cap_bps * self.QUANTUM_S_PER_BPS
            active.rotate(-1)
        self.busy = False

    def on_tx_complete(self, eng: Engine) -> None:
        st = self.current
        pkt = st.queue.popleft()
        qs = st.state
        qs.occupancy_bytes -= pkt.size
        qs.dequeues_total += 1
        if not st.queue:
            st.active = False
            st.deficit = 0.0
            self.active.remove(st)
        airtime = pkt.size * 8.0 / self._tx_rate(st, pkt)
        self.busy_time_by_flow[pkt.flow_id] = (
            self.busy_time_by_flow.get(pkt.flow_id, 0.0) + airtime)
        next_node = self.ap if st.node != self.ap else pkt.dst
        eng.schedule(eng.now + self.prop_delay_s, EventKind.PACKET_ARRIVAL,
                     next_node, pkt)
        self.current = None
        self._start_next(eng)


class Node:
    __slots__ = ("name", "routes")

    def __init__(self, name: str):
        self.name = name
        self.routes: dict[str, Link | Station] = {}

    def receive(self, eng: Engine, pkt: Packet) -> None:
        if pkt.dst == self.name:
            eng.deliver(self, pkt)
            return
        hop = self.routes.get(pkt.dst)
        if hop is None:
            raise RuntimeError(f"no route from {self.name} to {pkt.dst}")
        hop.enqueue(eng, pkt)


class Network:
    """Topology container: nodes, directed links, optional shared channel."""

    def __init__(self) -> None:
        self.nodes: dict[str, Node] = {}
        self.links: list[Link] = []
        self.channel: Channel | None = None

    def add_node(self, name: str) -> Node:
        node = Node(name)
        self.nodes[name] = node
        return node

    def add_link(self, src: str, dst: str, capacity_bps: float,
                 prop_delay_s: float, queue_capacity: int,
                 jitter_s: float = 0.0) -> Link:
        link = Link(f"{src}->{dst}", src, dst, capacity_bps, prop_delay_s,
                    queue_capacity, jitter_s=jitter_s)
        self.links.append(link)
        return link

    def add_duplex_link(self, a: str, b: str, capacity_bps: float,
                        prop_delay_s: float, queue_capacity: int,
                        jitter_s: float = 0.0) -> tuple[Link, Link]:
        return (self.add_link(a, b, capacity_bps, prop_delay_s, queue_capacity,
                              jitter_s=jitter_s),
                self.add_link(b, a, capacity_bps, prop_delay_s, queue_capacity,
                              jitter_s=jitter_s))

    def set_channel(self, channel: Channel) -> None:
        self.channel = channel

    def compute_routes(self) -> None:
        """Fill every node's next-hop table by BFS over the topology."""
        adjacency: dict[str, list[tuple[str, Link | Station]]] = {
            name: [] for name in self.nodes
        }
        for link in self.links:
            adjacency[link.src].append((link.dst, link))
        if self.channel is not None:
            ap = self.channel.ap
            for node, station in self.channel.stations.items():
                if node == ap:
                    continue
                adjacency[node].append((ap, station))
            ap_station = self.channel.stations.get(ap)
            if ap_station is not None:
                for node in self.channel.stations:
                    if node != ap:
                        adjacency[ap].append((node, ap_station))

        for origin in self.nodes:
            first_hop: dict[str, Link | Station] = {}
            visited = {origin}
            frontier: deque[str] = deque([origin])
            via: dict[str, Link | Station] = {}
            while frontier:
                here = frontier.popleft()
                for nxt, hop in adjacency[here]:
                    if nxt in visited:
                        continue
                    visited.add(nxt)
                    via[nxt] = hop if here == origin else via[here]
                    first_hop[nxt] = via[nxt]
                    frontier.append(nxt)
            self.nodes[origin].routes = first_hop

    def require_path(self, src: str, dst: str) -> None:
        if src not in self.nodes or dst not in self.nodes:
            raise ValueError(f"unknown node in flow endpoints {src!r} -> {dst!r}")
        if dst not in self.nodes[src].routes:
            raise ValueError(f"sink {dst!r} unreachable from {src!r}")

    def queued_packets(self) -> list[Packet]:
        pkts: list[Packet] = []
        for link in self.links:
            pkts.extend(link.queue)
        if self.channel is not None:
            for st in self.channel.stations.values():
                pkts.extend(st.queue)
        return pkts


class Engine:
    """Event loop over one Network; deterministic for fixed inputs."""

    def __init__(self, network: Network, duration_s: float,
                 record_trace: bool = False, seed: int = 0):
        if duration_s <= 0:
            raise ValueError("duration must be positive")
        self.network = network
        self.duration_s = duration_s
        self.now = 0.0
        self._seq = 0
        self._heap: list[tuple[float, int, int, object, object]] = []
        self._pkt_ids = 0
        self.flows: dict[int, object] = {}
        self.counters: dict[int, FlowCounters] = {}
        self.trace: list | None = [] if record_trace else None
        for link in network.links:
            if link.jitter_s > 0.0:
                link.rng = Random(splitmix64(seed ^ zlib.crc32(link.name.encode())))

    # -- scheduling -------------------------------------------------------

    def schedule(self, t: float, kind: EventKind, a: object, b: object = None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, int(kind), a, b))

    def schedule_timer(self, t: float, flow: object, tag: object,
                       kind: EventKind = EventKind.TIMER_FIRE) -> None:
        self.schedule(t, kind, flow, tag)

    # -- packet lifecycle --------------------------------------------------

    def register_flow(self, flow) -> None:
        self.flows[flow.flow_id] = flow
        self.counters[flow.flow_id] = FlowCounters()

    def new_packet(self, flow_id: int, size: int, payload: int, kind: PacketKind,
                   src: str, dst: str, **extra) -> Packet:
        if not 0 < size <= MAX_DATAGRAM + 100:
            raise ValueError(f"packet size {size} out of range")
        self._pkt_ids += 1
        return Packet(self._pkt_ids, flow_id, size, payload, self.now, kind,
                      src, dst, **extra)

    def emit(self, pkt: Packet) -> None:
        c = self.counters[pkt.flow_id]
        c.emitted += 1
        c.emitted_bytes += pkt.size
        if self.trace is not None:
            self.trace.append((self.now, pkt.flow_id, pkt.id, "EMIT", pkt.src, pkt.size))
        self.network.nodes[pkt.src].receive(self, pkt)

    def drop(self, pkt: Packet, node: str) -> None:
        c = self.counters[pkt.flow_id]
        c.dropped += 1
        c.dropped_bytes += pkt.size
        if self.trace is not None:
            self.trace.append((self.now, pkt.flow_id, pkt.id, "DROP", node, pkt.size))
        flow = self.flows.get(pkt.flow_id)
        if flow is not None:
            flow.on_drop(self, pkt)

    def deliver(self, node: Node, pkt: Packet) -> None:
        c = self.counters[pkt.flow_id]
        c.delivered += 1
        c.delivered_bytes += pkt.size
        if self.trace is not None:
            self.trace.append((self.now, pkt.flow_id, pkt.id, "DELIVER", node.name, pkt.size))
        flow = self.flows.get(pkt.flow_id)
        if flow is not None:
            flow.on_delivery(self, pkt)

    # -- main loop ---------------------------------------------------------

    def run(self) -> None:
        heap = self._heap
        nodes = self.network.nodes
        duration = self.duration_s
        arrival = int(EventKind.PACKET_ARRIVAL)
        tx_done = int(EventKind.TRANSMISSION_COMPLETE)
        while heap:
            t = heap[0][0]
            if t > duration:
                break
            t, _, kind, a, b = heapq.heappop(heap)
            self.now = t
            if kind == arrival:
                nodes[a].receive(self, b)
            elif kind == tx_done:
                a.on_tx_complete(self)
            else:  # TIMER_FIRE / FRAME_EMIT
                a.on_timer(self, b)
        self.now = duration

    # -- accounting --------------------------------------------------------

    def in_flight(self) -> dict[int, int]:
        """Packets still in queues or on the wire, per flow."""
        counts: dict[int, int] = {fid: 0 for fid in self.counters}
        for pkt in self.network.queued_packets():
            counts[pkt.flow_id] += 1
        for ev in self._heap:
            if ev[2] == int(EventKind.PACKET_ARRIVAL):
                counts[ev[4].flow_id] += 1
        return counts

    def conservation(self) -> dict[int, dict[str, int]]:
        """Per-flow emitted = delivered + dropped + in-flight bookkeeping."""
        residual = self.in_flight()
        table = {}
        for fid, c in self.counters.items():
            table[fid] = {
                "emitted": c.emitted,
                "delivered": c.delivered,
                "dropped": c.dropped,
                "in_flight": residual[fid],
                "balance": c.emitted - c.delivered - c.dropped - residual[fid],
            }
        return table


def format_trace(trace: list) -> str:
    """Render trace records as `time_s flow_id packet_id event node_id size_bytes`."""
    lines = [f"{t:.9f} {flow} {pid} {verb} {node} {size}"
             for (t, flow, pid, verb, node, size) in trace]
    return "\n".join(lines) + ("\n" if lines else "")
