"""Single-fault dictionary over a color quad, diagnosability, and matching.

The single-fault universe over one quad (one bump per codeword color, all in
one block) holds 14 faults: 8 stuck-at (4 colors x SA-0/SA-1) and 6 bridges
(unordered color pairs).  Simulating each of them yields the dictionary of
response signatures; faults sharing a signature form the ambiguous pairs that
bound diagnosability.  Observed full-map responses are matched back through
the dictionary, pruning bridge partners with the adjacency graph.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from math import comb

from .bist import (
    Bridge,
    BridgeBehavior,
    BlockTestReport,
    DetectorResponse,
    StuckAt,
    run_block_test,
)
from .bumpmap import (
    AdjacencyGraph,
    BumpMap,
    COLOR_INDEX,
    COLOR_ORDER,
    Color,
    Lattice,
    LatticeKind,
    build_bump_map,
)
from .curves import SeverityCurve, eval_severity, invert_severity, is_strictly_monotone
from .defects import (
    ComponentKind,
    FunctionalFaultClass,
    MagnitudeKind,
    geometry_note,
)
from .errors import ParameterError


@dataclass(frozen=True)
class QuadStuckAt:
    color: Color
    value: int


@dataclass(frozen=True)
class QuadBridge:
    color_a: Color
    color_b: Color  # ordered by color index, color_a before color_b


QuadFault = QuadStuckAt | QuadBridge

# A signature is the per-color response of the quad, in COLOR_ORDER.
Signature = tuple[DetectorResponse, DetectorResponse, DetectorResponse, DetectorResponse]


def quad_fault_universe() -> tuple[QuadFault, ...]:
    """The 14 single faults of a 4-color quad: 8 stuck-at plus 6 bridges."""
    faults: list[QuadFault] = [
        QuadStuckAt(color, value) for color in COLOR_ORDER for value in (0, 1)
    ]
    faults.extend(QuadBridge(a, b) for a, b in combinations(COLOR_ORDER, 2))
    return tuple(faults)


@functools.cache
def _quad_map() -> BumpMap:
    # One bump per color in a single block; any pair may bridge.
    lattice = Lattice(LatticeKind.RECTANGULAR, rows=1, cols=4, pitch_um=20.0)
    return replace(
        build_bump_map(lattice),
        coloring=COLOR_ORDER,
        blocks=(0, 0, 0, 0),
        block_count=1,
    )


def _signature_of(report: BlockTestReport) -> Signature:
    return tuple(report.responses[i] for i in range(4))  # type: ignore[return-value]


@dataclass(frozen=True)
class FaultDictionary:
    """Signature -> candidate faults, with ambiguity accounting.

    ``signatures_of`` keeps each fault's realizations: one signature for a
    stuck-at fault, one per wired behavior (wired-AND first) for a bridge.
    """

    universe: tuple[QuadFault, ...]
    by_signature: dict[Signature, frozenset[QuadFault]]
    signatures_of: dict[QuadFault, tuple[Signature, ...]]
    ambiguous_pairs: frozenset[frozenset[QuadFault]]


@functools.cache
def build_fault_dictionary() -> FaultDictionary:
    """Simulate all 14 quad faults and collect their response signatures."""
    bump_map = _quad_map()
    universe = quad_fault_universe()
    signatures_of: dict[QuadFault, tuple[Signature, ...]] = {}
    for fault in universe:
        if isinstance(fault, QuadStuckAt):
            injected = [StuckAt(COLOR_INDEX[fault.color], fault.value)]
            realizations = [injected]
        else:
            a, b = COLOR_INDEX[fault.color_a], COLOR_INDEX[fault.color_b]
            realizations = [
                [Bridge(a, b, BridgeBehavior.WIRED_AND)],
                [Bridge(a, b, BridgeBehavior.WIRED_OR)],
            ]
        signatures_of[fault] = tuple(
            _signature_of(run_block_test(bump_map, faults)[0]) for faults in realizations
        )
    by_signature: dict[Signature, set[QuadFault]] = {}
    for fault, signatures in signatures_of.items():
        for signature in signatures:
            by_signature.setdefault(signature, set()).add(fault)
    ambiguous = frozenset(
        frozenset(pair)
        for faults in by_signature.values()
        for pair in combinations(sorted(faults, key=repr), 2)
    )
    return FaultDictionary(
        universe=universe,
        by_signature={s: frozenset(f) for s, f in by_signature.items()},
        signatures_of=signatures_of,
        ambiguous_pairs=ambiguous,
    )


def diagnosability(dictionary: FaultDictionary) -> tuple[Fraction, float]:
    """Fraction of unordered fault pairs told apart by their signatures."""
    total = comb(len(dictionary.universe), 2)
    d = Fraction(total - len(dictionary.ambiguous_pairs), total)
    return d, float(d)


@dataclass(frozen=True)
class BridgeCandidate:
    """A bridge hypothesis between two bumps; wired behavior is folded away."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a >= self.b:
            raise ParameterError("bridge candidate endpoints must be ordered and distinct")


Candidate = StuckAt | BridgeCandidate


@dataclass(frozen=True)
class BumpDiagnosis:
    """Candidate faults consistent with one failing bump's response."""

    bump: int
    color: Color
    response: DetectorResponse
    candidates: tuple[Candidate, ...]
    unmodeled: bool = False


def diagnose(
    report: BlockTestReport,
    bump_map: BumpMap,
    graph: AdjacencyGraph,
    dictionary: FaultDictionary | None = None,
) -> list[BumpDiagnosis]:
    """Match failing bumps (y = 0) against the single-fault dictionary.

    Each failing bump is matched through its color-local response.  Bridge
    candidates are limited to adjacency-graph neighbors of the partner color
    whose own observed response agrees with the signature (neighbors outside
    the report, e.g. in another block, cannot be falsified and are kept).
    Candidates list stuck-at hypotheses first, then bridges by ascending
    partner id.  An empty list means no fault was detected.  Guarantees hold
    under the single-fault assumption; multi-fault reports are processed
    bump by bump on a best-effort basis.
    """
    if bump_map.coloring is None:
        raise ParameterError("bump map must be colored to diagnose responses")
    dictionary = dictionary or build_fault_dictionary()
    diagnoses = []
    for bump in sorted(report.responses):
        response = report.responses[bump]
        if response.y == 1:
            continue
        color = bump_map.coloring[bump]
        color_idx = COLOR_INDEX[color]

        stuck_candidates = [
            StuckAt(bump, fault.value)
            for fault in dictionary.universe
            if isinstance(fault, QuadStuckAt)
            and fault.color is color
            and dictionary.signatures_of[fault][0][color_idx] == response
        ]
        bridge_candidates: dict[tuple[int, int], BridgeCandidate] = {}
        modeled = bool(stuck_candidates)
        for fault in dictionary.universe:
            if not isinstance(fault, QuadBridge) or color not in (fault.color_a, fault.color_b):
                continue
            partner_color = fault.color_b if fault.color_a is color else fault.color_a
            partner_idx = COLOR_INDEX[partner_color]
            for signature in dict.fromkeys(dictionary.signatures_of[fault]):
                if signature[color_idx] != response:
                    continue
                modeled = True
                expected = signature[partner_idx]
                for neighbor in graph.neighbors(bump):
                    if bump_map.coloring[neighbor] is not partner_color:
                        continue
                    observed = report.responses.get(neighbor)
                    if observed is not None and observed != expected:
                        continue
                    key = (min(bump, neighbor), max(bump, neighbor))
                    bridge_candidates[key] = BridgeCandidate(*key)
        candidates = tuple(
            sorted(stuck_candidates, key=lambda f: f.value)
        ) + tuple(bridge_candidates[k] for k in sorted(bridge_candidates))
        diagnoses.append(
            BumpDiagnosis(
                bump=bump,
                color=color,
                response=response,
                candidates=candidates,
                unmodeled=not modeled,
            )
        )
    return diagnoses


@dataclass(frozen=True)
class MagnitudeBound:
    """Open interval on the defect magnitude; None means unbounded on that side."""

    kind: MagnitudeKind
    lower: float | None
    upper: float | None


@dataclass(frozen=True)
class GeometryBound:
    lower: float | None
    upper: float | None


@dataclass(frozen=True)
class DefectRangeEstimate:
    functional_class: FunctionalFaultClass
    magnitude_bound: MagnitudeBound
    geometry_bound: GeometryBound | None
    note: str | None
    warning: str | None = None


_CLASS_BOUNDS = {
    FunctionalFaultClass.WIRED_AND: MagnitudeBound(MagnitudeKind.RESISTANCE, None, 200.0),
    FunctionalFaultClass.SIGNAL_SA1: MagnitudeBound(MagnitudeKind.RESISTANCE, None, 500.0),
    FunctionalFaultClass.SIGNAL_SA0: MagnitudeBound(MagnitudeKind.RESISTANCE, None, 600.0),
    FunctionalFaultClass.OUTPUT_SA0: MagnitudeBound(MagnitudeKind.CAPACITANCE, 0.1e-15, 2e-6),
    FunctionalFaultClass.OUTPUT_SA1: MagnitudeBound(MagnitudeKind.CAPACITANCE, 0.1e-15, 2e-6),
    FunctionalFaultClass.WIRED_AND_OR_WIRED_OR: MagnitudeBound(
        MagnitudeKind.CAPACITANCE, None, 10e-15
    ),
}


def _default_class(candidate: Candidate | Bridge) -> FunctionalFaultClass:
    if isinstance(candidate, (BridgeCandidate, Bridge)):
        return FunctionalFaultClass.WIRED_AND
    if isinstance(candidate, StuckAt):
        return (
            FunctionalFaultClass.SIGNAL_SA1
            if candidate.value == 1
            else FunctionalFaultClass.SIGNAL_SA0
        )
    raise ParameterError(f"cannot infer a functional class for {candidate!r}")


def map_to_defect_range(
    candidate: Candidate | Bridge,
    component: ComponentKind,
    curve: SeverityCurve | None = None,
    functional_class: FunctionalFaultClass | None = None,
) -> DefectRangeEstimate:
    """Attach the magnitude bound of a diagnosed fault, and a geometry bound.

    By default a bridge maps to the signal-signal short bound and a stuck-at
    fault to the short-to-power/ground bound of its stuck value; pass
    ``functional_class`` explicitly for the open-defect interpretations
    (e.g. an output SA-0 caused by a power open).  When a strictly monotone
    severity curve magnitude = f(geometry) is supplied, the magnitude bound
    is inverted into a bound on the defect geometry.
    """
    fault_class = functional_class or _default_class(candidate)
    if fault_class not in _CLASS_BOUNDS:
        raise ParameterError(f"{fault_class.value} has no tabulated magnitude bound")
    bound = _CLASS_BOUNDS[fault_class]
    geometry = None
    warning = None
    if curve is not None:
        if not is_strictly_monotone(curve):
            warning = "severity curve is not strictly monotone; geometry bound omitted"
        else:
            f_lo = eval_severity(curve, curve.x_min)
            f_hi = eval_severity(curve, curve.x_max)
            increasing = f_hi > f_lo
            y_lo, y_hi = (f_lo, f_hi) if increasing else (f_hi, f_lo)

            def invert_inside(y: float | None) -> float | None:
                if y is None or not y_lo <= y <= y_hi:
                    return None
                return invert_severity(curve, y)

            x_upper = invert_inside(bound.upper)
            x_lower = invert_inside(bound.lower)
            if increasing:
                geometry = GeometryBound(lower=x_lower, upper=x_upper)
            else:
                geometry = GeometryBound(lower=x_upper, upper=x_lower)
            if geometry.lower is None and geometry.upper is None:
                geometry = None
                warning = "magnitude bound lies outside the curve's range"
    return DefectRangeEstimate(
        functional_class=fault_class,
        magnitude_bound=bound,
        geometry_bound=geometry,
        note=geometry_note(fault_class, component),
        warning=warning,
    )
