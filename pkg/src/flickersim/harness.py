"""Experiment runner: builds a network from a scenario, wires the flows,
runs the engine, and produces comparable reports.

Paired mode reruns the identical scenario with the attack switched off
(same master seed) and reports the camera's amplification factor against
that twin.  A splitmix-style derivation expands the master seed into
per-flow seeds, so adding a flow never perturbs the others' randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable, Sequence

from . import metrics
from .codec import CodecMode
from .config import FlowSpec, ScenarioConfig, Topology
from .netsim import Engine, RateLimiter
from .scene import SceneKind, SceneProfile
from .topology import build_network
from .traffic import (BaseLoadFlow, CameraFlow, EchoFlow, FileTransferFlow,
                      Flow, FlowKind, OneWayTcpFlow, TcpStressFlow,
                      UdpStressFlow)

RATE_LIMIT_BURST_BYTES = 131_072

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    return splitmix64((master & _MASK64) ^ splitmix64(index + 1))


def scene_profile_for(config: ScenarioConfig) -> SceneProfile:
    seed = derive_seed(config.seed, 0)
    if config.attack.enabled:
        return SceneProfile(SceneKind.FLICKER,
                            flicker_rate_hz=config.attack.flicker_hz,
                            horizontal_angle_deg=config.attack.h_angle_deg,
                            vertical_angle_deg=config.attack.v_angle_deg,
                            rng_seed=seed)
    return SceneProfile(SceneKind.STATIC, rng_seed=seed)


_FLOW_BUILDERS: dict[FlowKind, Callable[..., Flow]] = {}


def _build_flow(spec: FlowSpec, flow_id: int, seed: int) -> Flow:
    if spec.kind is FlowKind.BASE_LOAD_UDP:
        return BaseLoadFlow(flow_id, spec.name, spec.source, spec.sink,
                            spec.target_rate_bps, spec.start_s, spec.stop_s, seed)
    if spec.kind is FlowKind.ECHO_ROUNDTRIP:
        return EchoFlow(flow_id, spec.name, spec.source, spec.sink,
                        spec.payload_size, spec.interval_s, spec.start_s,
                        spec.stop_s, seed)
    if spec.kind is FlowKind.ONE_WAY_TCP_DATA:
        return OneWayTcpFlow(flow_id, spec.name, spec.source, spec.sink,
                             spec.payload_size, spec.interval_s, spec.start_s,
                             spec.stop_s, seed)
    if spec.kind is FlowKind.UDP_STRESS:
        return UdpStressFlow(flow_id, spec.name, spec.source, spec.sink,
                             spec.target_rate_bps, spec.start_s, spec.stop_s,
                             seed)
    if spec.kind is FlowKind.TCP_STRESS:
        return TcpStressFlow(flow_id, spec.name, spec.source, spec.sink,
                             spec.start_s, spec.stop_s, seed)
    if spec.kind is FlowKind.FILE_TRANSFER:
        return FileTransferFlow(flow_id, spec.name, spec.source, spec.sink,
                                spec.start_s, spec.stop_s, seed,
                                spec.volume_bytes)
    raise ValueError(f"unsupported flow kind {spec.kind}")


@dataclass
class RunResult:
    config: ScenarioConfig
    report: dict[str, Any]
    flows: list[Flow]
    engine: Engine


def run_engine(config: ScenarioConfig, record_trace: bool = False) -> RunResult:
    """One full scenario execution."""
    network, camera_ingress = build_network(config)
    engine = Engine(network, config.duration_s, record_trace=record_trace,
                    seed=config.seed)

    flows: list[Flow] = []
    camera = CameraFlow(0, "camera", "camera", "viewer", config.duration_s,
                        config.camera, scene_profile_for(config),
                        derive_seed(config.seed, 0))
    if config.mitigations.rate_limit_mbps is not None:
        camera.limiter = RateLimiter(config.mitigations.rate_limit_mbps * 1e6,
                                     RATE_LIMIT_BURST_BYTES)
        camera.ingress_node = camera_ingress
    flows.append(camera)
    if config.base_load_mbps > 0:
        base_spec = FlowSpec(name="base_load", kind=FlowKind.BASE_LOAD_UDP,
                             source="base_src", sink="base_dst",
                             target_rate_bps=config.base_load_mbps * 1e6,
                             start_s=0.0, stop_s=config.duration_s)
        flows.append(_build_flow(base_spec, 1, derive_seed(config.seed, 1)))
    for offset, spec in enumerate(config.flows):
        flow_id = 2 + offset
        flows.append(_build_flow(spec, flow_id, derive_seed(config.seed, flow_id)))

    for flow in flows:
        flow.attach(engine)
    engine.run()
    for flow in flows:
        flow.finalize(engine)

    extra = {
        "topology": config.topology.value,
        "base_load_mbps": config.base_load_mbps,
        "attack": {
            "enabled": config.attack.enabled,
            "h_angle_deg": config.attack.h_angle_deg,
            "v_angle_deg": config.attack.v_angle_deg,
            "flicker_hz": config.attack.flicker_hz,
        },
        "mitigations": {
            "rate_limit_mbps": config.mitigations.rate_limit_mbps,
            "cbr": config.camera.mode is CodecMode.CONSTANT_BITRATE,
        },
    }
    report = metrics.build_report(config.scenario_id, config.seed,
                                  config.duration_s, flows, engine, extra)
    return RunResult(config, report, flows, engine)


def attack_off_twin(config: ScenarioConfig) -> ScenarioConfig:
    return replace(config, attack=replace(config.attack, enabled=False),
                   scenario_id=config.scenario_id + "-baseline")


def run_experiment(config: ScenarioConfig, paired: bool = False,
                   record_trace: bool = False) -> dict[str, Any]:
    """Run a scenario; with `paired`, include the attack-off twin and the
    camera amplification factor computed against it."""
    try:
        result = run_engine(config, record_trace=record_trace)
    except Exception as exc:
        raise RuntimeError(f"scenario {config.scenario_id!r}: {exc}") from exc
    report = result.report
    if paired:
        baseline = run_engine(attack_off_twin(config)).report
        metrics.attach_amplification(report, baseline)
        report["baseline"] = baseline
    return report


SWEEP_PARAMS = ("h_angle", "v_angle", "base_load_mbps", "payload_size")


def _apply_sweep_value(config: ScenarioConfig, param: str,
                       value: float) -> ScenarioConfig:
    if param == "h_angle":
        return replace(config, attack=replace(config.attack, h_angle_deg=value))
    if param == "v_angle":
        return replace(config, attack=replace(config.attack, v_angle_deg=value))
    if param == "base_load_mbps":
        return replace(config, base_load_mbps=value)
    if param == "payload_size":
        flows = tuple(
            replace(spec, payload_size=int(value))
            if spec.kind in (FlowKind.ECHO_ROUNDTRIP, FlowKind.ONE_WAY_TCP_DATA)
            else spec
            for spec in config.flows)
        return replace(config, flows=flows)
    raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")


def sweep(config: ScenarioConfig, param: str,
          values: Sequence[float]) -> dict[str, Any]:
    """One report per value, all runs under the scenario's master seed."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    if not values:
        raise ValueError("sweep needs at least one value")
    rows = []
    reports = []
    for value in values:
        run_config = _apply_sweep_value(config, param, value)
        report = run_experiment(run_config)
        reports.append(report)
        row: dict[str, Any] = {"value": value,
                               "camera_bitrate_mbps": report["camera"]["bitrate_mbps"]}
        for name, flow_row in report["flows"].items():
            row[f"{name}_drop_rate"] = flow_row.get("drop_rate")
            rtt = flow_row.get("rtt_ms")
            row[f"{name}_rtt_p95_ms"] = rtt["p95"] if rtt else None
        rows.append(row)
    return {
        "scenario_id": config.scenario_id,
        "param": param,
        "values": list(values),
        "rows": rows,
        "reports": reports,
    }


def sweep_csv(summary: dict[str, Any]) -> str:
    keys = sorted({k for row in summary["rows"] for k in row if k != "value"})
    header = ["param", "value"] + keys
    lines = [",".join(header)]
    for row in summary["rows"]:
        cells = [summary["param"], f"{row['value']:g}"]
        for key in keys:
            val = row.get(key)
            cells.append("" if val is None else f"{val:.6f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# -- expectation checking ----------------------------------------------------

@dataclass(frozen=True)
class Expectation:
    path: str
    comparator: str
    args: tuple


def parse_expectations(text: str) -> list[Expectation]:
    expectations = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValueError(f"line {lineno}: expected 'PATH COMPARATOR ARGS...'")
        path, comparator, *rest = parts
        if comparator == "within":
            if len(rest) != 2:
                raise ValueError(f"line {lineno}: within needs LO and HI")
            args = (float(rest[0]), float(rest[1]))
        elif comparator in ("atleast", "atmost"):
            if len(rest) != 1:
                raise ValueError(f"line {lineno}: {comparator} needs one value")
            args = (float(rest[0]),)
        elif comparator == "monotone":
            if len(rest) != 1 or rest[0] not in ("nonincreasing", "nondecreasing"):
                raise ValueError(
                    f"line {lineno}: monotone needs nonincreasing|nondecreasing")
            args = (rest[0],)
        else:
            raise ValueError(f"line {lineno}: unknown comparator {comparator!r}")
        expectations.append(Expectation(path, comparator, args))
    return expectations


def _resolve(report: dict, path: str):
    node: Any = report
    for part in path.split("."):
        if isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise KeyError(f"unknown metric path {path!r} (stopped at {part!r})")
    return node


def check(report: dict[str, Any],
          expectations: list[Expectation]) -> list[tuple[bool, str]]:
    """Evaluate every expectation; returns (ok, message) per line."""
    results = []
    for exp in expectations:
        if exp.comparator == "monotone":
            rows = report.get("rows")
            if rows is None:
                raise KeyError("monotone expectations apply to sweep reports")
            series = [_resolve(row, exp.path) for row in rows]
            direction = exp.args[0]
            ok = True
            where = ""
            for i in range(1, len(series)):
                bad = (series[i] > series[i - 1] + 1e-12
                       if direction == "nonincreasing"
                       else series[i] < series[i - 1] - 1e-12)
                if bad:
                    ok = False
                    where = (f" violated at value {report['values'][i]:g} "
                             f"({series[i - 1]:.6g} -> {series[i]:.6g})")
                    break
            msg = (f"{exp.path} monotone {direction}: "
                   f"{[round(s, 6) for s in series]}{where}")
        else:
            actual = _resolve(report, exp.path)
            if exp.comparator == "within":
                lo, hi = exp.args
                ok = lo <= actual <= hi
                msg = f"{exp.path} within [{lo:g}, {hi:g}]: actual={actual:.6g}"
            elif exp.comparator == "atleast":
                ok = actual >= exp.args[0]
                msg = f"{exp.path} atleast {exp.args[0]:g}: actual={actual:.6g}"
            else:
                ok = actual <= exp.args[0]
                msg = f"{exp.path} atmost {exp.args[0]:g}: actual={actual:.6g}"
        results.append((ok, msg))
    return results
