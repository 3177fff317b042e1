"""Command-line interface.

    mcnn <subcommand> --config <file> [--depth N] [--resolution N]
         [--kmax N] [--out <path>] [--strict-boundary]

Subcommands: classify, build, entropy, measure, dimension, factor I J,
markov-check I J (0 = solution space), render LAYER, report.  The report
path writes report.json, summary.csv, pairs.csv and per-layer fractal
images (PGM + rectangle list + a matplotlib PNG).

Exit codes: 0 success, 2 usage error, 3 degenerate input, 4 internal limit.
The MCNN_TOLERANCE environment variable overrides the spectral tolerance.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .errors import (
    BoundaryParameter, DegenerateTemplate, DepthLimit, EmptyComposition,
    EmptyShift, IncompatibleLabels, NoConvergence, NotIrreducible,
    OracleLimit, SupportMismatch,
)
from .fractal import FractalSpec, render, render_figure, write_pgm, write_rectangles
from .pipeline import (
    PipelineOptions, pair_rows, run_pipeline, serialize_report, summary_rows,
)

DEGENERATE_ERRORS = (BoundaryParameter, DegenerateTemplate, EmptyComposition,
                     EmptyShift, SupportMismatch, NotIrreducible,
                     IncompatibleLabels)
LIMIT_ERRORS = (OracleLimit, DepthLimit, NoConvergence)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcnn",
        description="Symbolic-dynamics analysis of layered cellular "
                    "neural network templates.")
    parser.add_argument("command", choices=[
        "classify", "build", "entropy", "measure", "dimension", "factor",
        "markov-check", "render", "report"])
    parser.add_argument("args", nargs="*", help="subcommand arguments "
                                                "(layer indices)")
    parser.add_argument("--config", required=True, help="network template "
                                                        "JSON file")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument("--depth", type=int, default=6)
    parser.add_argument("--resolution", type=int, default=512)
    parser.add_argument("--kmax", type=int, default=4)
    parser.add_argument("--strict-boundary", action="store_true",
                        help="raise on parameters lying on a region boundary")
    return parser


def _emit(payload, out):
    text = serialize_report(payload) if isinstance(payload, dict) else str(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _analysis(ns):
    opts = PipelineOptions(boundary="strict" if ns.strict_boundary else "include",
                           k_max=ns.kmax)
    return run_pipeline(_load_config(ns), opts)


def _load_config(ns):
    with open(ns.config) as fh:
        return json.load(fh)


def cmd_classify(ns):
    report, _ = _analysis(ns)
    sol = report["solution_space"]
    _emit({"basic_set": sol["basic_set"],
           "boundary_notes": sol["boundary_notes"],
           "region_signature": sol["region_signature"]}, ns.out)
    return 0


def cmd_build(ns):
    report, ctx = _analysis(ns)
    sol = report["solution_space"]
    payload = {
        "states": sol["states"],
        "transition_matrix": sol["transition_matrix"],
        "layers": [{
            "layer": entry["layer"],
            "cover_states": entry["cover_states"],
            "cover_incidence": entry["cover_incidence"],
            "cover_symbolic": entry["cover_symbolic"],
        } for entry in report["layers"]],
    }
    _emit(payload, ns.out if ns.out and not os.path.isdir(ns.out) else None)
    if ns.out and os.path.isdir(ns.out):
        from .shifts import matrix_text, presentation_text

        with open(os.path.join(ns.out, "matrices.json"), "w") as fh:
            fh.write(serialize_report(payload) + "\n")
        with open(os.path.join(ns.out, "solution.matrix"), "w") as fh:
            fh.write(matrix_text(ctx["matrix"]))
        for w, entry in zip(ctx["covers"], report["layers"]):
            path = os.path.join(ns.out, "layer%d.graph" % entry["layer"])
            with open(path, "w") as fh:
                fh.write(presentation_text(w))
    return 0


def cmd_entropy(ns):
    report, _ = _analysis(ns)
    payload = {
        "solution": {"rho": report["solution_space"]["rho"],
                     "entropy": report["solution_space"]["entropy"]},
        "layers": [{"layer": e["layer"], "rho": e["rho"], "entropy": e["entropy"]}
                   for e in report["layers"]],
    }
    _emit(payload, ns.out)
    return 0


def cmd_measure(ns):
    report, _ = _analysis(ns)
    payload = {"layers": [{"layer": e["layer"],
                           "maximal_measure": e["maximal_measure"]}
                          for e in report["layers"]]}
    _emit(payload, ns.out)
    return 0


def cmd_dimension(ns):
    report, _ = _analysis(ns)
    payload = {"layers": [{"layer": e["layer"], **e["dimensions"]}
                          for e in report["layers"]]}
    _emit(payload, ns.out)
    return 0


def cmd_factor(ns):
    if len(ns.args) != 2:
        raise UsageError("factor needs two layer indices")
    i, j = (int(a) for a in ns.args)
    report, _ = _analysis(ns)
    for pair in report["pairs"]:
        if {pair["source_layer"], pair["target_layer"]} == {i, j}:
            _emit(pair, ns.out)
            return 0
    raise UsageError("no such layer pair")


def cmd_markov_check(ns):
    if len(ns.args) != 2:
        raise UsageError("markov-check needs source and target indices "
                         "(0 = solution space)")
    i, j = (int(a) for a in ns.args)
    report, ctx = _analysis(ns)
    if i == 0:
        entry = next((e for e in report["layers"] if e["layer"] == j), None)
        if entry is None:
            raise UsageError("no such layer")
        _emit(entry["markov_check"], ns.out)
        return 0
    for pair in report["pairs"]:
        if {pair["source_layer"], pair["target_layer"]} == {i, j}:
            payload = pair.get("cover_markov_check") or {
                "note": "no explicit one-block cover map for this pair"}
            payload = dict(payload)
            payload["direction"] = [pair["source_layer"], pair["target_layer"]]
            _emit(payload, ns.out)
            return 0
    raise UsageError("no such layer pair")


def cmd_render(ns):
    if len(ns.args) != 1:
        raise UsageError("render needs one layer index")
    layer = int(ns.args[0])
    report, ctx = _analysis(ns)
    if not 1 <= layer <= len(ctx["covers"]):
        raise UsageError("no such layer")
    w = ctx["covers"][layer - 1]
    spec = FractalSpec(w, depth=ns.depth, resolution=ns.resolution)
    image = render(spec)
    base = ns.out or "layer%d" % layer
    if os.path.isdir(base):
        base = os.path.join(base, "layer%d" % layer)
    write_pgm(image, base + ".pgm")
    write_rectangles(image, base + ".txt")
    render_figure([image], ["layer %d (depth %d)" % (layer, ns.depth)],
                  base + ".png")
    print("wrote %s.pgm %s.txt %s.png (%d rectangles)"
          % (base, base, base, len(image.rectangles)))
    return 0


def cmd_report(ns):
    report, ctx = _analysis(ns)
    outdir = ns.out or "."
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        fh.write(serialize_report(report) + "\n")
    with open(os.path.join(outdir, "summary.csv"), "w", newline="") as fh:
        rows = summary_rows(report)
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    with open(os.path.join(outdir, "pairs.csv"), "w", newline="") as fh:
        rows = pair_rows(report)
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    images, titles = [], []
    for w, entry in zip(ctx["covers"], report["layers"]):
        spec = FractalSpec(w, depth=ns.depth, resolution=ns.resolution)
        image = render(spec)
        stem = os.path.join(outdir, "layer%d_depth%d" % (entry["layer"], ns.depth))
        write_pgm(image, stem + ".pgm")
        write_rectangles(image, stem + ".txt")
        images.append(image)
        titles.append("layer %d" % entry["layer"])
    render_figure(images, titles, os.path.join(outdir, "fractals.png"))
    print("report written to %s" % outdir)
    return 0


class UsageError(Exception):
    pass


COMMANDS = {
    "classify": cmd_classify,
    "build": cmd_build,
    "entropy": cmd_entropy,
    "measure": cmd_measure,
    "dimension": cmd_dimension,
    "factor": cmd_factor,
    "markov-check": cmd_markov_check,
    "render": cmd_render,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        from .spectral import spectral_tolerance

        spectral_tolerance()  # fail fast on a malformed MCNN_TOLERANCE
        return COMMANDS[ns.command](ns)
    except (UsageError, ValueError) as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except DEGENERATE_ERRORS as exc:
        print("degenerate input: %s" % exc, file=sys.stderr)
        return 3
    except LIMIT_ERRORS as exc:
        print("internal limit: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
