"""Seeded fault-injection campaigns: config schema, sampling, canonical reports.

A campaign builds a colored, blocked bump map from a JSON config, simulates
every injected fault independently (single-fault assumption), diagnoses the
failing bumps, and aggregates detection metrics.  Reports serialize to
canonical JSON (sorted keys, fixed layout) so identical runs are
byte-identical.  The sampler uses Python's ``random.Random`` (MT19937), so a
given (seed, config) pair always yields the same fault list.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any

from .bist import (
    Bridge,
    BridgeBehavior,
    BlockTestReport,
    DetectorResponse,
    Fault,
    StuckAt,
    overhead_report,
    run_block_test,
)
from .bumpmap import (
    AdjacencyGraph,
    BumpMap,
    DEFAULT_SHORT_RADIUS_FACTOR,
    Lattice,
    LatticeKind,
    assign_codewords,
    build_bump_map,
    partition_blocks,
    potential_short_graph,
)
from .diagnosis import (
    BridgeCandidate,
    BumpDiagnosis,
    FaultDictionary,
    build_fault_dictionary,
    diagnosability,
    diagnose,
)
from .errors import ParameterError

SCHEMA_VERSION = 1

DEFAULT_KIND_MIX = {"sa": 0.5, "bridge": 0.5}
DEFAULT_BEHAVIOR_MIX = {"wired-and": 0.5, "wired-or": 0.5}


@dataclass(frozen=True)
class MapSpec:
    kind: LatticeKind
    rows: int
    cols: int
    pitch_um: float
    short_radius_factor: float = DEFAULT_SHORT_RADIUS_FACTOR


@dataclass(frozen=True)
class SamplerSpec:
    n_faults: int
    seed: int
    kind_mix: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_KIND_MIX))
    behavior_mix: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BEHAVIOR_MIX))
    include_inter_block: bool = True


@dataclass(frozen=True)
class CampaignConfig:
    map_spec: MapSpec
    block_count: int
    faults: tuple[Fault, ...] | None = None
    sampler: SamplerSpec | None = None
    output_report: str | None = None  # default report path; CLI --out wins


def _expect_keys(data: dict, where: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(data, dict):
        raise ParameterError(f"{where}: expected an object, got {type(data).__name__}")
    unknown = set(data) - required - optional
    if unknown:
        raise ParameterError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ParameterError(f"{where}: missing required fields {sorted(missing)}")


def _positive_int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ParameterError(f"{where}: expected a positive integer, got {value!r}")
    return value


def _positive_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ParameterError(f"{where}: expected a positive number, got {value!r}")
    return float(value)


def _weights(value: Any, where: str, allowed: set[str]) -> dict[str, float]:
    if not isinstance(value, dict):
        raise ParameterError(f"{where}: expected an object of weights")
    unknown = set(value) - allowed
    if unknown:
        raise ParameterError(f"{where}: unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})")
    weights = {}
    for key, raw in value.items():
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or raw < 0:
            raise ParameterError(f"{where}.{key}: weights must be non-negative numbers")
        weights[key] = float(raw)
    if sum(weights.values()) <= 0:
        raise ParameterError(f"{where}: weights must not all be zero")
    return weights


def fault_from_dict(data: dict, where: str = "fault") -> Fault:
    if not isinstance(data, dict) or "kind" not in data:
        raise ParameterError(f"{where}: expected an object with a 'kind' field")
    kind = data["kind"]
    if kind in ("sa0", "sa1"):
        _expect_keys(data, where, {"kind", "net"})
        net = data["net"]
        if not isinstance(net, int) or isinstance(net, bool) or net < 0:
            raise ParameterError(f"{where}.net: expected a bump id, got {net!r}")
        return StuckAt(net, 1 if kind == "sa1" else 0)
    if kind == "bridge":
        _expect_keys(data, where, {"kind", "a", "b", "behavior"})
        for end in ("a", "b"):
            if not isinstance(data[end], int) or isinstance(data[end], bool) or data[end] < 0:
                raise ParameterError(f"{where}.{end}: expected a bump id, got {data[end]!r}")
        try:
            behavior = BridgeBehavior(data["behavior"])
        except ValueError:
            raise ParameterError(
                f"{where}.behavior: expected 'wired-and' or 'wired-or', got {data['behavior']!r}"
            ) from None
        if data["a"] == data["b"]:
            raise ParameterError(f"{where}: bridge endpoints must differ")
        return Bridge(data["a"], data["b"], behavior)
    raise ParameterError(f"{where}.kind: expected 'sa0', 'sa1', or 'bridge', got {kind!r}")


def fault_to_dict(fault: Fault) -> dict:
    if isinstance(fault, StuckAt):
        return {"kind": f"sa{fault.value}", "net": fault.net}
    return {"kind": "bridge", "a": fault.a, "b": fault.b, "behavior": fault.behavior.value}


def parse_config(data: dict) -> CampaignConfig:
    """Validate a campaign config object; unknown fields are rejected."""
    _expect_keys(
        data, "config", {"version", "map", "block_count"}, {"faults", "sampler", "output"}
    )
    if data["version"] != SCHEMA_VERSION:
        raise ParameterError(f"config.version: expected {SCHEMA_VERSION}, got {data['version']!r}")
    raw_map = data["map"]
    _expect_keys(raw_map, "config.map", {"kind", "rows", "cols", "pitch_um"}, {"short_radius_factor"})
    try:
        kind = LatticeKind(raw_map["kind"])
    except ValueError:
        raise ParameterError(
            f"config.map.kind: expected 'hexagonal' or 'rectangular', got {raw_map['kind']!r}"
        ) from None
    map_spec = MapSpec(
        kind=kind,
        rows=_positive_int(raw_map["rows"], "config.map.rows"),
        cols=_positive_int(raw_map["cols"], "config.map.cols"),
        pitch_um=_positive_number(raw_map["pitch_um"], "config.map.pitch_um"),
        short_radius_factor=_positive_number(
            raw_map.get("short_radius_factor", DEFAULT_SHORT_RADIUS_FACTOR),
            "config.map.short_radius_factor",
        ),
    )
    block_count = _positive_int(data["block_count"], "config.block_count")
    has_faults = "faults" in data
    has_sampler = "sampler" in data
    if has_faults == has_sampler:
        raise ParameterError("config: exactly one of 'faults' and 'sampler' is required")
    faults = None
    sampler = None
    if has_faults:
        if not isinstance(data["faults"], list):
            raise ParameterError("config.faults: expected a list")
        faults = tuple(
            fault_from_dict(f, f"config.faults[{i}]") for i, f in enumerate(data["faults"])
        )
    else:
        raw = data["sampler"]
        _expect_keys(
            raw,
            "config.sampler",
            {"n_faults", "seed"},
            {"kind_mix", "behavior_mix", "include_inter_block"},
        )
        n_faults = raw["n_faults"]
        if not isinstance(n_faults, int) or isinstance(n_faults, bool) or n_faults < 0:
            raise ParameterError(f"config.sampler.n_faults: expected >= 0, got {n_faults!r}")
        seed = raw["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParameterError(f"config.sampler.seed: expected an integer, got {seed!r}")
        include = raw.get("include_inter_block", True)
        if not isinstance(include, bool):
            raise ParameterError("config.sampler.include_inter_block: expected a boolean")
        sampler = SamplerSpec(
            n_faults=n_faults,
            seed=seed,
            kind_mix=_weights(
                raw.get("kind_mix", DEFAULT_KIND_MIX), "config.sampler.kind_mix", {"sa", "bridge"}
            ),
            behavior_mix=_weights(
                raw.get("behavior_mix", DEFAULT_BEHAVIOR_MIX),
                "config.sampler.behavior_mix",
                {"wired-and", "wired-or"},
            ),
            include_inter_block=include,
        )
    output_report = None
    if "output" in data:
        _expect_keys(data["output"], "config.output", set(), {"report"})
        report_path = data["output"].get("report")
        if report_path is not None and not isinstance(report_path, str):
            raise ParameterError("config.output.report: expected a path string")
        output_report = report_path
    return CampaignConfig(
        map_spec=map_spec,
        block_count=block_count,
        faults=faults,
        sampler=sampler,
        output_report=output_report,
    )


def load_config(path) -> CampaignConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data)


def config_to_dict(config: CampaignConfig) -> dict:
    """Config echo with defaults filled in; parse_config(result) round-trips."""
    out: dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "map": {
            "kind": config.map_spec.kind.value,
            "rows": config.map_spec.rows,
            "cols": config.map_spec.cols,
            "pitch_um": config.map_spec.pitch_um,
            "short_radius_factor": config.map_spec.short_radius_factor,
        },
        "block_count": config.block_count,
    }
    if config.faults is not None:
        out["faults"] = [fault_to_dict(f) for f in config.faults]
    if config.sampler is not None:
        out["sampler"] = {
            "n_faults": config.sampler.n_faults,
            "seed": config.sampler.seed,
            "kind_mix": dict(sorted(config.sampler.kind_mix.items())),
            "behavior_mix": dict(sorted(config.sampler.behavior_mix.items())),
            "include_inter_block": config.sampler.include_inter_block,
        }
    if config.output_report is not None:
        out["output"] = {"report": config.output_report}
    return out


def build_campaign_map(config: CampaignConfig) -> tuple[BumpMap, AdjacencyGraph]:
    """Build, color, and block the campaign's bump map."""
    spec = config.map_spec
    lattice = Lattice(spec.kind, spec.rows, spec.cols, spec.pitch_um)
    bump_map = build_bump_map(lattice)
    graph = potential_short_graph(bump_map, spec.short_radius_factor * spec.pitch_um)
    bump_map = assign_codewords(bump_map, graph)
    bump_map = partition_blocks(bump_map, config.block_count)
    return bump_map, graph


def sample_faults(
    sampler: SamplerSpec, bump_map: BumpMap, graph: AdjacencyGraph
) -> tuple[Fault, ...]:
    """Deterministically sample a fault list: unique stuck-ats and bridge edges.

    Stuck-at picks are uniform over (bump, value) pairs; bridge picks are
    uniform over adjacency-graph edges (optionally restricted to same-block
    edges), each with a wired behavior drawn from the behavior mix.
    """
    rng = random.Random(sampler.seed)
    w_sa = sampler.kind_mix.get("sa", 0.0)
    w_bridge = sampler.kind_mix.get("bridge", 0.0)
    n_bridge = round(sampler.n_faults * w_bridge / (w_sa + w_bridge))
    n_sa = sampler.n_faults - n_bridge

    sa_population = 2 * bump_map.bump_count
    if n_sa > sa_population:
        raise ParameterError(
            f"requested {n_sa} stuck-at faults but only {sa_population} exist"
        )
    edges = sorted(graph.edges)
    if not sampler.include_inter_block:
        if bump_map.blocks is None:
            raise ParameterError("map must be blocked to exclude inter-block edges")
        edges = [e for e in edges if bump_map.blocks[e[0]] == bump_map.blocks[e[1]]]
    if n_bridge > len(edges):
        raise ParameterError(
            f"requested {n_bridge} bridge faults but only {len(edges)} edges are available"
        )

    behaviors = [BridgeBehavior.WIRED_AND, BridgeBehavior.WIRED_OR]
    behavior_weights = [sampler.behavior_mix.get(b.value, 0.0) for b in behaviors]
    faults: list[Fault] = [
        StuckAt(pick // 2, pick % 2) for pick in rng.sample(range(sa_population), n_sa)
    ]
    for a, b in rng.sample(edges, n_bridge):
        behavior = rng.choices(behaviors, weights=behavior_weights)[0]
        faults.append(Bridge(a, b, behavior))
    return tuple(faults)


def _response_to_list(response: DetectorResponse) -> list[int]:
    return [response.x, response.y]


def diagnosis_to_dict(entry: BumpDiagnosis, block: int) -> dict:
    candidates = []
    for candidate in entry.candidates:
        if isinstance(candidate, StuckAt):
            candidates.append({"kind": f"sa{candidate.value}", "net": candidate.net})
        else:
            candidates.append({"kind": "bridge", "a": candidate.a, "b": candidate.b})
    return {
        "block": block,
        "bump": entry.bump,
        "color": entry.color.value,
        "response": _response_to_list(entry.response),
        "unmodeled": entry.unmodeled,
        "candidates": candidates,
    }


def _candidate_matches(candidate, fault: Fault) -> bool:
    if isinstance(candidate, StuckAt) and isinstance(fault, StuckAt):
        return candidate == fault
    if isinstance(candidate, BridgeCandidate) and isinstance(fault, Bridge):
        return (candidate.a, candidate.b) == (fault.a, fault.b)
    return False


def diagnose_reports(
    reports: list[BlockTestReport],
    bump_map: BumpMap,
    graph: AdjacencyGraph,
    dictionary: FaultDictionary | None = None,
) -> list[dict]:
    """Diagnosis entries for a full test run, blocks in ascending order."""
    entries = []
    for report in reports:
        for entry in diagnose(report, bump_map, graph, dictionary):
            entries.append(diagnosis_to_dict(entry, report.block))
    return entries


def run_campaign(config: CampaignConfig) -> dict:
    """Run a campaign and return the canonical report object.

    Every fault is simulated on its own (single-fault assumption), so results
    are independent of fault-list order and safe to parallelize; this
    implementation runs them sequentially.
    """
    bump_map, graph = build_campaign_map(config)
    if config.faults is not None:
        faults = config.faults
    else:
        faults = sample_faults(config.sampler, bump_map, graph)
    for fault in faults:
        top = fault.net if isinstance(fault, StuckAt) else fault.b
        if top >= bump_map.bump_count:
            raise ParameterError(f"fault {fault_to_dict(fault)} references a bump outside the map")

    dictionary = build_fault_dictionary()
    d_fraction, d_decimal = diagnosability(dictionary)

    fault_results = []
    detected_count = 0
    diagnosis_hits = 0
    escapes = []
    inter_or_total = 0
    inter_or_escaped = 0
    for fault in faults:
        reports = run_block_test(bump_map, [fault])
        failing = [
            {"block": r.block, "bump": b, "response": _response_to_list(resp)}
            for r in reports
            for b, resp in sorted(r.responses.items())
            if resp.y == 0
        ]
        detected = bool(failing)
        entries = [
            (report.block, entry)
            for report in reports
            for entry in diagnose(report, bump_map, graph, dictionary)
        ]
        diagnosis = [diagnosis_to_dict(entry, block) for block, entry in entries]
        hit = any(
            _candidate_matches(candidate, fault)
            for _, entry in entries
            for candidate in entry.candidates
        )
        inter_block = None
        if isinstance(fault, Bridge):
            inter_block = bump_map.blocks[fault.a] != bump_map.blocks[fault.b]
            if inter_block and fault.behavior is BridgeBehavior.WIRED_OR:
                inter_or_total += 1
                if not detected:
                    inter_or_escaped += 1
        detected_count += detected
        diagnosis_hits += hit
        if not detected:
            escapes.append(fault_to_dict(fault))
        fault_results.append(
            {
                "fault": fault_to_dict(fault),
                "detected": detected,
                "inter_block": inter_block,
                "failing": failing,
                "diagnosis": diagnosis,
                "diagnosis_hit": hit,
            }
        )

    overhead = overhead_report(bump_map)
    injected = len(faults)
    metrics = {
        "injected": injected,
        "detected": detected_count,
        "detection_rate": (detected_count / injected) if injected else None,
        "diagnosis_hits": diagnosis_hits,
        "escaped": len(escapes),
        "escapes": escapes,
        "inter_block_wired_or": {
            "injected": inter_or_total,
            "escaped": inter_or_escaped,
            "escape_rate": (inter_or_escaped / inter_or_total) if inter_or_total else None,
        },
    }
    block_sizes = [len(bump_map.bumps_in_block(k)) for k in range(config.block_count)]
    return {
        "version": SCHEMA_VERSION,
        "config": config_to_dict(config),
        "map": {
            "bumps": bump_map.bump_count,
            "edges": graph.edge_count,
            "block_sizes": block_sizes,
        },
        "overhead": {
            "detector_count": overhead.detector_count,
            "tpg_count": overhead.tpg_count,
            "mux_count": overhead.mux_count,
            "test_cycles": overhead.test_cycles,
        },
        "diagnosability": {
            "numerator": d_fraction.numerator,
            "denominator": d_fraction.denominator,
            "decimal": d_decimal,
            "ambiguous_pairs": len(dictionary.ambiguous_pairs),
        },
        "fault_results": fault_results,
        "metrics": metrics,
    }


def canonical_json(obj: Any) -> str:
    """Canonical serialization: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def rediagnose_report(report: dict) -> dict:
    """Re-derive every fault's diagnosis from a stored campaign report.

    Only failing responses are stored; every other bump of a block must have
    passed with (1, 1) (a y = 1 response forces x = 1), so the per-block
    reports can be reconstructed exactly.
    """
    _expect_keys(
        report,
        "report",
        {"version", "config", "map", "overhead", "diagnosability", "fault_results", "metrics"},
    )
    if report["version"] != SCHEMA_VERSION:
        raise ParameterError(f"report.version: expected {SCHEMA_VERSION}")
    config = parse_config(report["config"])
    bump_map, graph = build_campaign_map(config)
    dictionary = build_fault_dictionary()
    diagnoses = []
    for result in report["fault_results"]:
        failing: dict[int, dict[int, DetectorResponse]] = {}
        for item in result["failing"]:
            failing.setdefault(item["block"], {})[item["bump"]] = DetectorResponse(
                *item["response"]
            )
        reports = []
        for block in range(config.block_count):
            responses = {
                b: failing.get(block, {}).get(b, DetectorResponse(1, 1))
                for b in bump_map.bumps_in_block(block)
            }
            reports.append(BlockTestReport(block=block, responses=responses, received={}))
        diagnoses.append(diagnose_reports(reports, bump_map, graph, dictionary))
    return {"version": SCHEMA_VERSION, "diagnoses": diagnoses}
