"""Command-line front end.

Subcommands: gen-map, dictionary, simulate, diagnose, netlist, fit, classify.
Exit status is 0 on success, 1 on a validation/usage error, and 2 on a
simulation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bumpmap import (
    COLOR_ORDER,
    DEFAULT_SHORT_RADIUS_FACTOR,
    Lattice,
    LatticeKind,
    assign_codewords,
    build_bump_map,
    partition_blocks,
    potential_short_graph,
)
from .campaign import (
    SCHEMA_VERSION,
    canonical_json,
    load_config,
    rediagnose_report,
    run_campaign,
)
from .circuits import build_faulty_circuit, emit_netlist
from .curves import CurveFamily, fit_severity_curve, load_samples_csv
from .defects import (
    ComponentKind,
    ElectricalScenario,
    FaultMagnitude,
    PhysicalDefect,
    classify_defect,
)
from .diagnosis import QuadStuckAt, build_fault_dictionary, diagnosability
from .errors import FitError, InversionError, ParameterError, SimulationError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the CLI contract wants 1.
    def error(self, message):
        raise _UsageError(message)


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_gen_map(args) -> int:
    lattice = Lattice(LatticeKind(args.kind), args.rows, args.cols, args.pitch_um)
    bump_map = build_bump_map(lattice)
    graph = potential_short_graph(bump_map, args.radius_factor * args.pitch_um)
    bump_map = assign_codewords(bump_map, graph)
    bump_map = partition_blocks(bump_map, args.blocks)
    payload = {
        "version": SCHEMA_VERSION,
        "lattice": {
            "kind": lattice.kind.value,
            "rows": lattice.rows,
            "cols": lattice.cols,
            "pitch_um": lattice.pitch_um,
        },
        "short_radius_um": args.radius_factor * args.pitch_um,
        "positions": [list(p) for p in bump_map.positions],
        "colors": [c.value for c in bump_map.coloring],
        "blocks": list(bump_map.blocks),
        "block_count": bump_map.block_count,
        "edges": [list(e) for e in sorted(graph.edges)],
    }
    _write_output(canonical_json(payload), args.out)
    return 0


def _quad_fault_name(fault) -> str:
    if isinstance(fault, QuadStuckAt):
        return f"{fault.color.value} sa-{fault.value}"
    return f"{fault.color_a.value}+{fault.color_b.value} bridge"


def _cmd_dictionary(args) -> int:
    dictionary = build_fault_dictionary()
    d_fraction, d_decimal = diagnosability(dictionary)
    pairs = sorted(
        tuple(sorted(_quad_fault_name(f) for f in pair)) for pair in dictionary.ambiguous_pairs
    )
    if args.format == "json":
        entries = []
        for signature, faults in sorted(
            dictionary.by_signature.items(), key=lambda item: repr(item[0])
        ):
            entries.append(
                {
                    "signature": {
                        color.value: list(resp) for color, resp in zip(COLOR_ORDER, signature)
                    },
                    "faults": sorted(_quad_fault_name(f) for f in faults),
                }
            )
        payload = {
            "version": SCHEMA_VERSION,
            "diagnosability": {
                "numerator": d_fraction.numerator,
                "denominator": d_fraction.denominator,
                "decimal": d_decimal,
            },
            "ambiguous_pairs": [list(p) for p in pairs],
            "entries": entries,
        }
        _write_output(canonical_json(payload), args.out)
        return 0
    if args.format == "csv":
        lines = ["fault,behavior,green,blue,red,black"]
        for fault in dictionary.universe:
            signatures = dictionary.signatures_of[fault]
            behaviors = ["-"] if len(signatures) == 1 else ["wired-and", "wired-or"]
            for behavior, signature in zip(behaviors, signatures):
                cells = ["{}|{}".format(*resp) for resp in signature]
                lines.append(",".join([_quad_fault_name(fault), behavior, *cells]))
        _write_output("\n".join(lines) + "\n", args.out)
        return 0
    lines = [
        f"fault universe: {len(dictionary.universe)} single faults",
        f"ambiguous pairs: {len(dictionary.ambiguous_pairs)}",
    ]
    for left, right in pairs:
        lines.append(f"  {left}  <->  {right}")
    lines.append(
        f"diagnosability D = {d_fraction.numerator}/{d_fraction.denominator}"
        f" = {d_decimal:.5f}"
    )
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        if config.sampler is None:
            raise ParameterError("--seed override requires a sampler-based config")
        config = replace(config, sampler=replace(config.sampler, seed=args.seed))
    report = run_campaign(config)
    text = canonical_json(report)
    out = args.out or config.output_report
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        metrics = report["metrics"]
        if args.format == "csv":
            rate = metrics["detection_rate"]
            inter = metrics["inter_block_wired_or"]
            sys.stdout.write("injected,detected,detection_rate,inter_block_wired_or_escape_rate\n")
            sys.stdout.write(
                f"{metrics['injected']},{metrics['detected']},"
                f"{'' if rate is None else rate},"
                f"{'' if inter['escape_rate'] is None else inter['escape_rate']}\n"
            )
        else:
            sys.stdout.write(canonical_json(metrics))
    return 0


def _cmd_diagnose(args) -> int:
    with open(args.report, encoding="utf-8") as handle:
        try:
            report = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{args.report}: invalid JSON ({exc})") from None
    _write_output(canonical_json(rediagnose_report(report)), args.out)
    return 0


_DEFECT_CHOICES = {
    "none": None,
    "crack": PhysicalDefect.PILLAR_CRACK,
    "full-break": PhysicalDefect.PILLAR_CRACK,
    "resistive-misalignment": PhysicalDefect.RESISTIVE_MISALIGNMENT,
    "capacitive-misalignment": PhysicalDefect.CAPACITIVE_MISALIGNMENT,
    "bridge": "bridge",
    "damaged-rdl": PhysicalDefect.DAMAGED_RDL,
}


def _cmd_netlist(args) -> int:
    component = ComponentKind(args.component)
    defect = _DEFECT_CHOICES[args.defect]
    if defect == "bridge":
        defect = (
            PhysicalDefect.PILLAR_BRIDGE
            if component is ComponentKind.CU_PILLAR
            else PhysicalDefect.RDL_BRIDGE
        )
    if args.defect == "full-break" and args.rf_ohm is not None:
        raise ParameterError("a full break takes only --cf-farad (no residual path)")
    circuit = build_faulty_circuit(
        component,
        defect,
        r_fault_ohm=args.rf_ohm,
        c_fault_f=args.cf_farad,
        length_um=args.length_um,
        contact_resistance_ohm=args.contact_ohm,
    )
    # The deck format ends at ".END" with no trailing newline; keep file
    # bytes identical to the emitted text.
    _write_output(emit_netlist(circuit, args.title), args.out)
    return 0


def _cmd_fit(args) -> int:
    samples = load_samples_csv(args.csv)
    curve = fit_severity_curve(samples, CurveFamily(args.family), degree=args.degree)
    payload = {
        "family": curve.family.value,
        "coefficients": list(curve.coefficients),
        "domain": [curve.x_min, curve.x_max],
        "n_samples": len(samples),
    }
    _write_output(canonical_json(payload), args.out)
    return 0


def _cmd_classify(args) -> int:
    if (args.r_ohm is None) == (args.c_farad is None):
        raise ParameterError("classify needs exactly one of --r-ohm and --c-farad")
    if args.r_ohm is not None:
        magnitude = FaultMagnitude.resistance(args.r_ohm)
    else:
        magnitude = FaultMagnitude.capacitance(args.c_farad)
    fault_class = classify_defect(ElectricalScenario(args.scenario), magnitude)
    sys.stdout.write(fault_class.value + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chipletbist", description=__doc__)
    parser.add_argument("--version", action="version", version=f"chipletbist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-map", help="emit a colored, blocked bump map")
    p.add_argument("--kind", choices=[k.value for k in LatticeKind], required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--pitch-um", type=float, required=True)
    p.add_argument("--radius-factor", type=float, default=DEFAULT_SHORT_RADIUS_FACTOR)
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen_map)

    p = sub.add_parser("dictionary", help="emit the 14-fault dictionary and diagnosability")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_dictionary)

    p = sub.add_parser("simulate", help="run a fault campaign from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="report path; metrics go to stdout")
    p.add_argument("--seed", type=int, help="override the sampler seed")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("diagnose", help="re-diagnose a stored campaign report")
    p.add_argument("--report", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("netlist", help="emit an equivalent-circuit card deck")
    p.add_argument("--component", choices=[k.value for k in ComponentKind], required=True)
    p.add_argument("--defect", choices=sorted(_DEFECT_CHOICES), default="none")
    p.add_argument("--rf-ohm", type=float)
    p.add_argument("--cf-farad", type=float)
    p.add_argument("--length-um", type=float)
    p.add_argument("--contact-ohm", type=float, default=0.0)
    p.add_argument("--title", default="")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_netlist)

    p = sub.add_parser("fit", help="fit a severity curve from CSV samples")
    p.add_argument("--csv", required=True)
    p.add_argument("--family", choices=[f.value for f in CurveFamily], required=True)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("classify", help="classify a defect magnitude")
    p.add_argument(
        "--scenario", choices=[s.value for s in ElectricalScenario], required=True
    )
    p.add_argument("--r-ohm", type=float)
    p.add_argument("--c-farad", type=float)
    p.set_defaults(func=_cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ParameterError, FitError, InversionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    raise SystemExit(main())
