"""AIMD congestion control and a reliable byte-stream connection.

NewReno-flavoured: slow start, congestion avoidance with appropriate
byte counting, fast retransmit on the third duplicate ACK, and timeout
recovery with exponential RTO backoff.  The window-update rules are pure
functions over TcpState; Connection wires them to the event engine.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .netsim import Engine, Packet, PacketKind

MSS = 1460
ACK_SIZE = 54
SEGMENT_HEADERS = 54
INITIAL_CWND_SEGMENTS = 10
INITIAL_SSTHRESH = 1 << 30
RTO_INITIAL = 1.0
RTO_MIN = 0.2
RTO_MAX = 60.0
DUP_ACK_THRESHOLD = 3


class TcpPhase(Enum):
    SLOW_START = "slow_start"
    CONGESTION_AVOIDANCE = "congestion_avoidance"
    RECOVERY = "recovery"


class LossKind(Enum):
    TRIPLE_DUP = "triple_dup"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TcpState:
    cwnd: int = INITIAL_CWND_SEGMENTS * MSS
    ssthresh: int = INITIAL_SSTHRESH
    srtt: float = 0.0
    rttvar: float = 0.0
    rto: float = RTO_INITIAL
    in_flight: int = 0
    phase: TcpPhase = TcpPhase.SLOW_START
    ca_acked: int = 0  # byte accumulator for congestion avoidance


def tcp_on_ack(state: TcpState, acked_bytes: int, mss: int = MSS) -> TcpState:
    """Window growth for `acked_bytes` of newly acknowledged data."""
    if acked_bytes <= 0 or state.phase is TcpPhase.RECOVERY:
        return state
    if state.phase is TcpPhase.SLOW_START:
        cwnd = state.cwnd + acked_bytes
        if cwnd >= state.ssthresh:
            return replace(state, cwnd=cwnd, phase=TcpPhase.CONGESTION_AVOIDANCE,
                           ca_acked=0)
        return replace(state, cwnd=cwnd)
    # Congestion avoidance: one segment per window's worth of ACKed bytes.
    ca_acked = state.ca_acked + acked_bytes
    cwnd = state.cwnd
    while ca_acked >= cwnd:
        ca_acked -= cwnd
        cwnd += mss
    return replace(state, cwnd=cwnd, ca_acked=ca_acked)


def tcp_on_loss(state: TcpState, kind: LossKind, mss: int = MSS) -> TcpState:
    if kind is LossKind.TRIPLE_DUP:
        ssthresh = max(state.cwnd // 2, 2 * mss)
        return replace(state, cwnd=max(ssthresh, mss), ssthresh=ssthresh,
                       phase=TcpPhase.RECOVERY, ca_acked=0)
    ssthresh = max(state.in_flight // 2, 2 * mss)
    return replace(state, cwnd=mss, ssthresh=ssthresh,
                   rto=min(state.rto * 2.0, RTO_MAX),
                   phase=TcpPhase.SLOW_START, ca_acked=0)


def tcp_rtt_sample(state: TcpState, sample_s: float) -> TcpState:
    """RTT estimator update (RFC 6298 smoothing, clamped RTO)."""
    if state.srtt == 0.0:
        srtt = sample_s
        rttvar = sample_s / 2.0
    else:
        rttvar = 0.75 * state.rttvar + 0.25 * abs(state.srtt - sample_s)
        srtt = 0.875 * state.srtt + 0.125 * sample_s
    rto = min(max(srtt + 4.0 * rttvar, RTO_MIN), RTO_MAX)
    return replace(state, srtt=srtt, rttvar=rttvar, rto=rto)


class Connection:
    """Reliable sender/receiver pair for one flow across the network.

    `volume_bytes=None` streams forever (stress-test semantics); a finite
    volume completes when its last byte is cumulatively acknowledged.
    """

    def __init__(self, flow, src: str, dst: str,
                 volume_bytes: int | None = None, mss: int = MSS):
        self.flow = flow
        self.src = src
        self.dst = dst
        self.volume = volume_bytes
        self.mss = mss
        self.state = TcpState(cwnd=INITIAL_CWND_SEGMENTS * mss)
        # sender
        self.una = 0
        self.nxt = 0
        self.high_water = 0  # highest byte ever sent; below it = retransmission
        self.dup_acks = 0
        self.recover = -1
        self.timer_epoch = 0
        self.timer_armed = False
        self.timed_seq: int | None = None
        self.timed_at = 0.0
        self.completed_at: float | None = None
        self.retransmits = 0
        self.timeouts = 0
        # receiver
        self.rcv_next = 0
        self.ooo: dict[int, int] = {}

    # -- sender ------------------------------------------------------------

    def _segment_len(self, seq: int) -> int:
        if self.volume is None:
            return self.mss
        return min(self.mss, self.volume - seq)

    def _send_segment(self, eng: Engine, seq: int) -> None:
        length = self._segment_len(seq)
        retransmitted = seq < self.high_water
        pkt = eng.new_packet(self.flow.flow_id, length + SEGMENT_HEADERS, length,
                             PacketKind.STREAM, self.src, self.dst,
                             seq=seq, retransmitted=retransmitted)
        if retransmitted:
            # Karn: a retransmission anywhere invalidates the pending sample;
            # the cumulative ACK can no longer date the timed segment.
            self.timed_seq = None
            self.retransmits += 1
        elif self.timed_seq is None:
            self.timed_seq = seq
            self.timed_at = eng.now
        self.flow.emit_packet(eng, pkt)

    def _send_window(self) -> int:
        # Dup ACKs signal segments that left the network; inflating the
        # usable window by one segment each keeps recovery flowing.
        window = self.state.cwnd
        if self.state.phase is TcpPhase.RECOVERY:
            window += self.dup_acks * self.mss
        return window

    def pump(self, eng: Engine) -> None:
        while True:
            if self.volume is not None and self.nxt >= self.volume:
                return
            length = self._segment_len(self.nxt)
            if self.nxt - self.una + length > self._send_window():
                return
            self._send_segment(eng, self.nxt)
            self.nxt += length
            self.high_water = max(self.high_water, self.nxt)
            self.state = replace(self.state, in_flight=self.nxt - self.una)
            if not self.timer_armed:
                self._arm_timer(eng)

    def _arm_timer(self, eng: Engine) -> None:
        self.timer_epoch += 1
        self.timer_armed = True
        eng.schedule_timer(eng.now + self.state.rto, self.flow,
                           ("rto", self.timer_epoch))

    def _cancel_timer(self) -> None:
        self.timer_epoch += 1
        self.timer_armed = False

    def on_ack(self, eng: Engine, pkt: Packet) -> None:
        ack = pkt.ack_seq
        if ack > self.una:
            acked = ack - self.una
            self.una = ack
            if self.timed_seq is not None and ack > self.timed_seq:
                self.state = tcp_rtt_sample(self.state, eng.now - self.timed_at)
                self.timed_seq = None
            if self.state.phase is TcpPhase.RECOVERY:
                if ack >= self.recover:
                    self.state = replace(self.state, cwnd=self.state.ssthresh,
                                         phase=TcpPhase.CONGESTION_AVOIDANCE,
                                         ca_acked=0)
                    self.dup_acks = 0
                else:
                    # Partial ACK: the next hole was lost too.
                    self._send_segment(eng, self.una)
            else:
                self.dup_acks = 0
                self.state = tcp_on_ack(self.state, acked, self.mss)
            self.state = replace(self.state, in_flight=self.nxt - self.una)
            if self.una >= self.nxt:
                self._cancel_timer()
            else:
                self._arm_timer(eng)
            if self.volume is not None and self.una >= self.volume \
                    and self.completed_at is None:
                self.completed_at = eng.now
                return
            self.pump(eng)
        elif ack == self.una and self.una < self.nxt:
            self.dup_acks += 1
            if self.state.phase is TcpPhase.RECOVERY:
                self.pump(eng)
            elif self.dup_acks == DUP_ACK_THRESHOLD:
                self.state = tcp_on_loss(self.state, LossKind.TRIPLE_DUP, self.mss)
                self.recover = self.nxt
                self._send_segment(eng, self.una)
                self._arm_timer(eng)

    def on_rto(self, eng: Engine, epoch: int) -> None:
        if not self.timer_armed or epoch != self.timer_epoch or self.una >= self.nxt:
            return
        self.timeouts += 1
        self.state = tcp_on_loss(self.state, LossKind.TIMEOUT, self.mss)
        self.dup_acks = 0
        self.recover = self.high_water
        # Everything unacknowledged is presumed lost; resend from the
        # cumulative ACK point under the collapsed window.
        self.nxt = self.una
        self.state = replace(self.state, in_flight=0)
        self.timed_seq = None
        self._arm_timer(eng)
        self.pump(eng)

    # -- receiver ----------------------------------------------------------

    def on_data(self, eng: Engine, pkt: Packet) -> None:
        seq, length = pkt.seq, pkt.payload
        advanced = 0
        if seq == self.rcv_next:
            self.rcv_next += length
            advanced += length
            while self.rcv_next in self.ooo:
                step = self.ooo.pop(self.rcv_next)
                self.rcv_next += step
                advanced += step
        elif seq > self.rcv_next:
            self.ooo[seq] = length
        if advanced:
            self.flow.on_inorder_bytes(eng, advanced)
        ack = eng.new_packet(self.flow.flow_id, ACK_SIZE, 0, PacketKind.ACK,
                             self.dst, self.src, ack_seq=self.rcv_next)
        self.flow.emit_packet(eng, ack)
