"""Fault simulation and BIST verification kit for chiplet interconnect bump maps."""

__version__ = "0.1.0"

from .bist import (
    Bridge,
    BridgeBehavior,
    BlockTestReport,
    CODEWORDS,
    DetectorResponse,
    Fault,
    OverheadReport,
    Pattern3,
    StuckAt,
    TestSchedule,
    bump_response,
    detector_accepts,
    fsm_schedule,
    overhead_report,
    pattern_for,
    resolve_net_values,
    run_block_test,
)
from .bumpmap import (
    AdjacencyGraph,
    BumpMap,
    COLOR_ORDER,
    Color,
    DEFAULT_SHORT_RADIUS_FACTOR,
    Lattice,
    LatticeKind,
    assign_codewords,
    build_bump_map,
    partition_blocks,
    potential_short_graph,
)
from .campaign import (
    CampaignConfig,
    MapSpec,
    SamplerSpec,
    canonical_json,
    load_config,
    parse_config,
    run_campaign,
    sample_faults,
)
from .circuits import CircuitElement, EquivalentCircuit, build_faulty_circuit, emit_netlist
from .curves import (
    CurveFamily,
    SeverityCurve,
    eval_severity,
    fit_severity_curve,
    invert_severity,
    load_samples_csv,
)
from .defects import (
    ComponentKind,
    ElectricalScenario,
    FaultMagnitude,
    FunctionalFaultClass,
    NetClass,
    NominalParasitics,
    PhysicalDefect,
    classify_defect,
    nominal_parasitics,
    scenario_for,
)
from .diagnosis import (
    BridgeCandidate,
    BumpDiagnosis,
    DefectRangeEstimate,
    FaultDictionary,
    QuadBridge,
    QuadStuckAt,
    build_fault_dictionary,
    diagnosability,
    diagnose,
    map_to_defect_range,
)
from .errors import (
    ColoringError,
    FitError,
    InversionError,
    KitError,
    ParameterError,
    SimulationError,
)
