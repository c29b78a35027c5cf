"""Disruption metrics computed from finished runs.

All statistics are derived from flow bookkeeping and engine counters;
round-trip probes count as dropped when either direction is lost or the
answer misses the five-second window.  Percentiles are nearest-rank, so
two runs with the same trace report byte-identical numbers.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .netsim import Engine
from .traffic import (CameraFlow, FileTransferFlow, Flow, FlowKind, _ProbeFlow)


def nearest_rank(sorted_values: list[float], q: float) -> float:
    idx = max(0, math.ceil(q * len(sorted_values)) - 1)
    return sorted_values[idx]


def rtt_stats(rtts_s: list[float]) -> dict[str, float] | None:
    """Mean and percentiles in milliseconds over completed probes only."""
    if not rtts_s:
        return None
    vals = sorted(r * 1000.0 for r in rtts_s)
    return {
        "mean": sum(vals) / len(vals),
        "p50": nearest_rank(vals, 0.50),
        "p95": nearest_rank(vals, 0.95),
        "max": vals[-1],
    }


def drop_rate(sent: int, dropped: int) -> float | None:
    if sent == 0:
        return None
    return dropped / sent


def amplification(attack_bitrate_bps: float, baseline_bitrate_bps: float) -> float:
    if baseline_bitrate_bps <= 0:
        raise ValueError("baseline camera bitrate is zero; amplification undefined")
    return attack_bitrate_bps / baseline_bitrate_bps


def throughput_series(flow: Flow, duration_s: float) -> list[float]:
    """Delivered payload per whole one-second bin, in Mb/s.

    Bins align to integer simulation seconds inside the flow's active
    window; a trailing partial bin is discarded.
    """
    first = int(math.ceil(flow.start_s))
    last = int(math.floor(min(flow.stop_s, duration_s)))
    return [flow.bins.get(t, 0) * 8.0 / 1e6 for t in range(first, last)]


def flow_report(flow: Flow, eng: Engine, duration_s: float) -> dict[str, Any]:
    counters = eng.counters[flow.flow_id]
    series = throughput_series(flow, duration_s)
    mean_tput = sum(series) / len(series) if series else 0.0
    row: dict[str, Any] = {
        "flow_id": flow.flow_id,
        "kind": flow.kind.value,
        "payload_bytes": flow.payload_bytes,
        "packets": {
            "emitted": counters.emitted,
            "delivered": counters.delivered,
            "dropped": counters.dropped,
        },
        "bytes": {
            "emitted": counters.emitted_bytes,
            "delivered": counters.delivered_bytes,
            "dropped": counters.dropped_bytes,
        },
        "throughput_mbps": mean_tput,
        "throughput_series": series,
    }
    if isinstance(flow, _ProbeFlow):
        completed = flow.completed_probes()
        sent = flow.probes_sent
        dropped = sent - len(completed)
        row["sent"] = sent
        row["delivered"] = len(completed)
        row["dropped"] = dropped
        row["drop_rate"] = drop_rate(sent, dropped)
        stats = rtt_stats(list(completed.values()))
        if stats is None:
            row["rtt_ms"] = None
            row["rtt_absent_reason"] = "no completed probes"
        else:
            row["rtt_ms"] = stats
    else:
        row["sent"] = counters.emitted
        row["delivered"] = counters.delivered
        row["dropped"] = counters.dropped
        row["drop_rate"] = drop_rate(counters.emitted, counters.dropped)
    if isinstance(flow, FileTransferFlow):
        row["completion_time_s"] = flow.completion_time_s
        row["bytes_acknowledged"] = flow.bytes_acknowledged
        row["complete"] = flow.completion_time_s is not None
    return row


def build_report(scenario_id: str, seed: int, duration_s: float,
                 flows: list[Flow], eng: Engine,
                 extra: dict[str, Any] | None = None) -> dict[str, Any]:
    conservation = eng.conservation()
    report: dict[str, Any] = {
        "scenario_id": scenario_id,
        "seed": seed,
        "duration_s": duration_s,
        "flows": {flow.name: flow_report(flow, eng, duration_s) for flow in flows},
        "conservation": {str(fid): row for fid, row in conservation.items()},
    }
    camera = next((f for f in flows if isinstance(f, CameraFlow)), None)
    if camera is not None:
        report["camera"] = {
            "bitrate_mbps": camera.mean_bitrate_bps(duration_s) / 1e6,
            "media_bytes": camera.media_bytes,
            "frames": len(camera.frames),
        }
    if extra:
        report.update(extra)
    return report


def attach_amplification(report: dict[str, Any], baseline: dict[str, Any]) -> None:
    report["camera"]["amplification"] = amplification(
        report["camera"]["bitrate_mbps"], baseline["camera"]["bitrate_mbps"])


def report_json(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


CSV_HEADER = ("flow_id,kind,payload_bytes,sent,delivered,dropped,drop_rate,"
              "rtt_mean_ms,rtt_p95_ms,throughput_mbps")


def flows_csv(report: dict[str, Any]) -> str:
    """Stable-ordered per-flow summary table."""
    lines = [CSV_HEADER]
    for name in sorted(report["flows"], key=lambda n: report["flows"][n]["flow_id"]):
        row = report["flows"][name]
        rtt = row.get("rtt_ms")
        dr = row.get("drop_rate")
        lines.append(",".join([
            str(row["flow_id"]),
            row["kind"],
            str(row["payload_bytes"]),
            str(row["sent"]),
            str(row["delivered"]),
            str(row["dropped"]),
            f"{dr:.6f}" if dr is not None else "",
            f"{rtt['mean']:.3f}" if rtt else "",
            f"{rtt['p95']:.3f}" if rtt else "",
            f"{row['throughput_mbps']:.4f}",
        ]))
    return "\n".join(lines) + "\n"
