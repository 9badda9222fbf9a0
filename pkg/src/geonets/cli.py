"""Command-line entry point: ``geonets <subcommand> ...``.

Exit codes: 0 success, 1 input error, 2 computation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import geoanalysis as geo
from . import metrics
from .graph import (GeoGraph, read_graph_csv, read_nodes_csv, write_edges_csv,
                    write_geojson, write_nodes_csv)
from .grid import (EmptySelectionError, GridFormatError, apply_mask_and_filter,
                   load_grid, load_mask, write_grid_csv)
from .netbuild import (backbone_graph, calibrate_alpha, candidate_taus,
                       scan_max_diameter_threshold, threshold_graph)
from .nullmodels import DEFAULT_SAMPLES, ensemble_metrics
from .pipeline import ConfigError, PipelineConfig, PipelineError, run_pipeline
from .similarity import read_similarity, similarity_matrix, write_similarity
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger("geonets")

INPUT_ERRORS = (GridFormatError, EmptySelectionError, ConfigError, FileNotFoundError,
                json.JSONDecodeError)


def _n_jobs(threads):
    return -1 if threads == 0 else threads


def _write(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def cmd_synth(args):
    spec = {}
    if args.config:
        spec = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        spec["seed"] = args.seed
    grid = generate_synthetic(SyntheticSpec.from_dict(spec))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_grid_csv(grid, args.out)


def cmd_ingest(args):
    grid = load_grid(args.grid, args.format, args.time_step)
    mask = load_mask(args.mask) if args.mask else None
    grid = apply_mask_and_filter(grid, mask, args.min_rate)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_grid_csv(grid, args.out)
    if grid.flagged.any():
        log.warning("%d cells have constant series", int(grid.flagged.sum()))


def cmd_similarity(args):
    grid = load_grid(args.grid, "csv")
    sim = similarity_matrix(grid, args.measure, args.bins, args.normalization)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_similarity(sim, args.out)


def cmd_build(args):
    sim = read_similarity(args.similarity)
    nodes = GeoGraph(*read_nodes_csv(args.nodes), edges=np.empty((0, 2)), weights=[])
    out = Path(args.out)
    label = args.label
    if args.criterion == "gt":
        if args.tau is not None:
            tau = args.tau
        else:
            if args.scan == "exact":
                taus = candidate_taus(sim, max_exact_nodes=sim.n)
            elif args.scan == "auto":
                taus = candidate_taus(sim)
            else:
                taus = candidate_taus(sim, max_exact_nodes=-1, grid_points=int(args.scan))
            scan = scan_max_diameter_threshold(sim, taus, not args.inclusive)
            _write(out / f"{label}_scan.json", scan.to_json())
            tau = scan.chosen_tau
        g = threshold_graph(sim, tau, not args.inclusive, nodes, label)
    else:
        if (args.alpha is None) == (args.target_edges is None):
            raise ConfigError("give exactly one of --alpha or --target-edges")
        if args.alpha is not None:
            alpha = args.alpha
        else:
            cal = calibrate_alpha(sim, args.target_edges)
            _write(out / f"{label}_calibration.json",
                   json.dumps(cal.to_dict(), indent=2) + "\n")
            alpha = cal.alpha
        g = backbone_graph(sim, alpha, nodes, label)
    out.mkdir(parents=True, exist_ok=True)
    write_nodes_csv(g, out / "nodes.csv")
    write_edges_csv(g, out / f"{label}_edges.csv")
    write_geojson(g, out / f"{label}.geojson")


def cmd_nullmodel(args):
    g = read_graph_csv(args.nodes, args.edges, args.label)
    sim = read_similarity(args.similarity) if args.similarity else None
    report = ensemble_metrics(g, args.samples, args.seed, sim=sim,
                              n_jobs=_n_jobs(args.threads), label=args.label)
    _write(args.out, report.to_json())


def cmd_metrics(args):
    g = read_graph_csv(args.nodes, args.edges, args.label)
    report = metrics.full_report(g)
    _write(args.out, report.to_json())
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        metrics.write_table([report.table_row()], args.csv)


def cmd_geo(args):
    g = read_graph_csv(args.nodes, args.edges, args.label)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label = args.label or "network"
    pairs = geo.distance_pairs(g)
    pairs.write_csv(out / f"{label}_scatter.csv")
    _write(out / f"{label}_regression.json", geo.regress(pairs).to_json())
    _write(out / f"{label}_edge_lengths.json", geo.edge_length_stats(g, args.bins).to_json())
    geo.weight_histogram(g, args.bins).write_csv(out / f"{label}_weight_hist.csv")


def cmd_pipeline(args):
    if not args.config:
        raise ConfigError("pipeline needs --config")
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.samples is not None:
        raw["samples"] = args.samples
    if args.no_intermediates:
        raw["intermediates"] = False
    if args.threads is not None:
        raw["threads"] = args.threads
    config = PipelineConfig.from_dict(raw)
    manifest = run_pipeline(config, args.out)
    print(f"wrote {len(manifest['files'])} files to {args.out}")


PIPELINE_CONFIG_HELP = """\
config keys (JSON object) and defaults:
  grid               path to grid file (or set "synthetic")        null
  grid_format        "csv" or "binary" (.npz)                       "csv"
  mask               GeoJSON polygon or text file of cell ids       null
  synthetic          SyntheticSpec fields, e.g. {"nx": 10, "seed": 0}  null
  time_step_minutes  sampling interval of the grid                  10
  min_rate_mm_h      rain rates at or below this are set to 0       1.0
  mi_bins            MI histogram bins; null = Sturges' rule        null
  mi_normalization   "max_entropy" (divide by log2 bins) or "none"  "max_entropy"
  threshold          {"strict": true, "PC": {...}, "MI": {...}}; per measure
                     {"tau": x} or {"scan": "auto" | "exact" | n}   scan "auto"
  backbone           {"PC": {...}, "MI": {...}}; per measure
                     {"alpha": a} or {"target_edges": n | "match_gt"}  "match_gt"
  samples            configuration-model samples                   10000
  seed               RNG seed                                       0
  hist_bins          histogram bins for exports                     20
  intermediates      write grid.csv and similarity_*.csv            true
  threads            workers for the null model, 0 = all cores      1
"""


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (u64)")
    common.add_argument("--out", required=True, help="output file or directory")
    common.add_argument("--samples", type=int, default=None,
                        help=f"configuration-model samples (default {DEFAULT_SAMPLES})")
    common.add_argument("--no-intermediates", action="store_true",
                        help="do not write grid and similarity intermediates")
    common.add_argument("--threads", type=int, default=None,
                        help="worker count, 0 = all cores (default 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="geonets", description=__doc__,
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    s = sub.add_parser("synth", parents=[common], formatter_class=fmt,
                       help="write a synthetic grid CSV (--config: SyntheticSpec JSON)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", parents=[common], formatter_class=fmt,
                       help="load, convert, mask and filter a grid")
    s.add_argument("--grid", required=True)
    s.add_argument("--format", choices=["csv", "binary"], default="csv")
    s.add_argument("--mask", help="GeoJSON polygon or text file of cell ids")
    s.add_argument("--min-rate", type=float, default=1.0,
                   help="rain rates at or below this (mm/h) are set to 0")
    s.add_argument("--time-step", type=float, default=10.0, help="minutes per sample")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("similarity", parents=[common], formatter_class=fmt,
                       help="pairwise similarity matrix of a grid CSV")
    s.add_argument("--grid", required=True)
    s.add_argument("--measure", choices=["PC", "MI"], default="PC")
    s.add_argument("--bins", type=int, default=None, help="MI bins (default: Sturges)")
    s.add_argument("--normalization", choices=["max_entropy", "none"],
                   default="max_entropy")
    s.set_defaults(func=cmd_similarity)

    s = sub.add_parser("build", parents=[common], formatter_class=fmt,
                       help="threshold (gt) or backbone (bb) network")
    s.add_argument("--similarity", required=True, help="similarity CSV (with .json sidecar)")
    s.add_argument("--nodes", required=True, help="nodes or grid CSV")
    s.add_argument("--criterion", choices=["gt", "bb"], required=True)
    s.add_argument("--label", default="network")
    s.add_argument("--tau", type=float, default=None, help="fixed threshold")
    s.add_argument("--scan", default="auto",
                   help="threshold scan when --tau is absent: auto, exact or grid size")
    s.add_argument("--inclusive", action="store_true", help="keep weights equal to tau")
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--target-edges", type=int, default=None)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("nullmodel", parents=[common], formatter_class=fmt,
                       help="configuration-model ensemble metrics")
    s.add_argument("--nodes", required=True)
    s.add_argument("--edges", required=True)
    s.add_argument("--similarity", help="take CM weights from this similarity matrix")
    s.add_argument("--label", default="CM")
    s.set_defaults(func=cmd_nullmodel)

    s = sub.add_parser("metrics", parents=[common], formatter_class=fmt,
                       help="topological metrics of a network")
    s.add_argument("--nodes", required=True)
    s.add_argument("--edges", required=True)
    s.add_argument("--label", default="")
    s.add_argument("--csv", help="also write a summary-table CSV row here")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("geo", parents=[common], formatter_class=fmt,
                       help="topological vs geographical distance analysis")
    s.add_argument("--nodes", required=True)
    s.add_argument("--edges", required=True)
    s.add_argument("--label", default="network")
    s.add_argument("--bins", type=int, default=20)
    s.set_defaults(func=cmd_geo)

    s = sub.add_parser("pipeline", parents=[common],
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       help="run every stage from one JSON config",
                       epilog=PIPELINE_CONFIG_HELP)
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "nullmodel":
        args.samples = DEFAULT_SAMPLES if args.samples is None else args.samples
        args.seed = 0 if args.seed is None else args.seed
        args.threads = 1 if args.threads is None else args.threads
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if exc.is_input_error else 2
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"computation error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
