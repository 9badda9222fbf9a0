"""End-to-end run: ingest, similarity, the four networks, null models,
metrics, geographic analysis and exports."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import geoanalysis as geo
from . import metrics
from .graph import GeoGraph, write_edges_csv, write_geojson, write_nodes_csv
from .grid import (EmptySelectionError, GridFormatError, apply_mask_and_filter,
                   load_grid, load_mask, write_grid_csv)
from .metrics import UndefinedMetricError
from .netbuild import (backbone_graph, calibrate_alpha, candidate_taus,
                       scan_max_diameter_threshold, shared_edges, threshold_graph)
from .nullmodels import DEFAULT_SAMPLES, ensemble_metrics, ensemble_weights
from .similarity import similarity_matrix, write_similarity
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)

NETWORK_ORDER = ("pcGT", "pcBB", "pcCM", "miGT", "miBB", "miCM")


class ConfigError(ValueError):
    """The pipeline configuration is invalid."""


class PipelineError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def is_input_error(self) -> bool:
        return isinstance(self.cause, (ConfigError, GridFormatError, EmptySelectionError,
                                       FileNotFoundError, json.JSONDecodeError))


def _default_threshold():
    return {"strict": True, "PC": {"scan": "auto"}, "MI": {"scan": "auto"}}


def _default_backbone():
    return {"PC": {"target_edges": "match_gt"}, "MI": {"target_edges": "match_gt"}}


@dataclass
class PipelineConfig:
    """Settings of one pipeline run; loaded from a single JSON document.

    ``threshold[measure]`` holds either ``{"tau": float}`` or
    ``{"scan": "auto" | "exact" | n_grid_points}``. ``backbone[measure]``
    holds either ``{"alpha": float}`` or ``{"target_edges": int | "match_gt"}``.
    Exactly one of ``grid`` and ``synthetic`` is set.
    """

    grid: str | None = None
    grid_format: str = "csv"
    mask: str | None = None
    synthetic: dict | None = None
    time_step_minutes: float = 10.0
    min_rate_mm_h: float = 1.0
    mi_bins: int | None = None
    mi_normalization: str = "max_entropy"
    threshold: dict = field(default_factory=_default_threshold)
    backbone: dict = field(default_factory=_default_backbone)
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    hist_bins: int = 20
    intermediates: bool = True
    threads: int = 1

    def __post_init__(self):
        if (self.grid is None) == (self.synthetic is None):
            raise ConfigError("set exactly one of 'grid' or 'synthetic'")
        if self.grid_format not in ("csv", "binary"):
            raise ConfigError("grid_format must be 'csv' or 'binary'")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        self.threshold = {**_default_threshold(), **self.threshold}
        self.backbone = {**_default_backbone(), **self.backbone}
        for measure in ("PC", "MI"):
            t = self.threshold[measure]
            if ("tau" in t) == ("scan" in t):
                raise ConfigError(f"threshold.{measure}: give exactly one of tau or scan")
            if "scan" in t and not (t["scan"] in ("auto", "exact")
                                    or (isinstance(t["scan"], int) and t["scan"] >= 1)):
                raise ConfigError(f"threshold.{measure}.scan must be auto, exact or an int")
            b = self.backbone[measure]
            if ("alpha" in b) == ("target_edges" in b):
                raise ConfigError(
                    f"backbone.{measure}: give exactly one of alpha or target_edges")
            if "alpha" in b and not 0 < b["alpha"] < 1:
                raise ConfigError(f"backbone.{measure}.alpha must lie in (0, 1)")
            if "target_edges" in b and not (
                    b["target_edges"] == "match_gt"
                    or (isinstance(b["target_edges"], int) and b["target_edges"] >= 0)):
                raise ConfigError(
                    f"backbone.{measure}.target_edges must be 'match_gt' or an int >= 0")
        if self.synthetic is not None:
            try:
                SyntheticSpec.from_dict(self.synthetic)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"synthetic: {exc}") from None

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


class _Run:
    def __init__(self, config: PipelineConfig, workdir: Path):
        self.cfg = config
        self.dir = workdir
        self.stage = "setup"

    def path(self, name):
        return self.dir / name

    def ingest(self):
        cfg = self.cfg
        if cfg.synthetic is not None:
            raw = generate_synthetic(SyntheticSpec.from_dict(cfg.synthetic))
        else:
            raw = load_grid(cfg.grid, cfg.grid_format, cfg.time_step_minutes)
        mask = load_mask(cfg.mask) if cfg.mask else None
        grid = apply_mask_and_filter(raw, mask, cfg.min_rate_mm_h)
        if grid.flagged.any():
            log.warning("%d cells have constant series after filtering",
                        int(grid.flagged.sum()))
        if cfg.intermediates:
            write_grid_csv(grid, self.path("grid.csv"))
        return grid

    def gt_network(self, sim, nodes, label):
        t = self.cfg.threshold[sim.measure]
        strict = self.cfg.threshold.get("strict", True)
        if "tau" in t:
            tau = float(t["tau"])
        else:
            scan = t["scan"]
            if scan == "auto":
                taus = candidate_taus(sim)
            elif scan == "exact":
                taus = candidate_taus(sim, max_exact_nodes=sim.n)
            else:
                taus = candidate_taus(sim, max_exact_nodes=-1, grid_points=scan)
            result = scan_max_diameter_threshold(sim, taus, strict)
            self._export_scan(result, label)
            tau = result.chosen_tau
        return threshold_graph(sim, tau, strict, nodes, label), tau

    def _export_scan(self, result, label):
        d = result.to_dict()
        keep = [k for k, v in enumerate(d["diameters"]) if v >= 0]
        _write_json(self.path(f"{label}_scan.json"), {
            "chosen_tau": d["chosen_tau"], "max_diameter": d["max_diameter"],
            "n_candidates": len(d["taus"]),
            "evaluated": [{"tau": d["taus"][k], "diameter": d["diameters"][k]}
                          for k in keep]})

    def bb_network(self, sim, nodes, label, gt_edges):
        b = self.cfg.backbone[sim.measure]
        if "alpha" in b:
            alpha = float(b["alpha"])
        else:
            target = gt_edges if b["target_edges"] == "match_gt" else b["target_edges"]
            cal = calibrate_alpha(sim, int(target))
            _write_json(self.path(f"{label}_calibration.json"), cal.to_dict())
            alpha = cal.alpha
        return backbone_graph(sim, alpha, nodes, label), alpha

    def export_network(self, g: GeoGraph):
        label, bins = g.label, self.cfg.hist_bins
        write_edges_csv(g, self.path(f"{label}_edges.csv"))
        write_geojson(g, self.path(f"{label}.geojson"))
        report = metrics.full_report(g)
        self.path(f"{label}_metrics.json").write_text(report.to_json(), encoding="utf-8")
        try:
            geo.weight_histogram(g, bins).write_csv(self.path(f"{label}_weight_hist.csv"))
            stats = geo.edge_length_stats(g, bins)
            self.path(f"{label}_edge_lengths.json").write_text(stats.to_json(),
                                                                encoding="utf-8")
            pairs = geo.distance_pairs(g)
            pairs.write_csv(self.path(f"{label}_scatter.csv"))
        except UndefinedMetricError as exc:
            _write_json(self.path(f"{label}_regression.json"), {"undefined": str(exc)})
            return report
        try:
            reg = geo.regress(pairs).to_dict()
        except ValueError as exc:
            reg = {"undefined": str(exc)}
        _write_json(self.path(f"{label}_regression.json"), reg)
        return report

    def export_ensemble(self, gt, sim, label):
        cfg = self.cfg
        n_jobs = -1 if cfg.threads == 0 else cfg.threads
        report = ensemble_metrics(gt, cfg.samples, cfg.seed, sim=sim, n_jobs=n_jobs,
                                  label=label)
        self.path(f"{label}_ensemble.json").write_text(report.to_json(), encoding="utf-8")
        weights = ensemble_weights(gt, cfg.samples, cfg.seed, sim=sim)
        if weights.size:
            geo.histogram(weights, cfg.hist_bins).write_csv(
                self.path(f"{label}_weight_hist.csv"))
        return report

    def run(self):
        cfg = self.cfg
        self.stage = "ingest"
        grid = self.ingest()
        nodes = GeoGraph.from_nodes(grid)
        write_nodes_csv(nodes, self.path("nodes.csv"))

        rows, shared = {}, {}
        for measure, prefix in (("PC", "pc"), ("MI", "mi")):
            self.stage = f"similarity[{measure}]"
            sim = similarity_matrix(grid, measure, cfg.mi_bins, cfg.mi_normalization)
            if cfg.intermediates:
                write_similarity(sim, self.path(f"similarity_{prefix}.csv"))

            self.stage = f"build[{prefix}GT]"
            gt, tau = self.gt_network(sim, grid, f"{prefix}GT")
            self.stage = f"build[{prefix}BB]"
            bb, alpha = self.bb_network(sim, grid, f"{prefix}BB", gt.n_edges)
            log.info("%s: tau=%.6g (%d edges), alpha=%.6g (%d edges)", measure, tau,
                     gt.n_edges, alpha, bb.n_edges)

            for g in (gt, bb):
                self.stage = f"metrics[{g.label}]"
                rows[g.label] = self.export_network(g).table_row()
            self.stage = f"nullmodel[{prefix}CM]"
            rows[f"{prefix}CM"] = self.export_ensemble(gt, sim, f"{prefix}CM").table_row()

            count, frac = shared_edges(gt, bb)
            shared[measure] = {"gt": gt.label, "bb": bb.label, "gt_edges": gt.n_edges,
                               "bb_edges": bb.n_edges, "shared": count,
                               "fraction_of_gt": frac}

        self.stage = "export"
        metrics.write_table([rows[k] for k in NETWORK_ORDER], self.path("table1.csv"))
        _write_json(self.path("shared_edges.json"), shared)
        files = sorted(p for p in self.dir.iterdir() if p.name != "manifest.json")
        manifest = {"config": cfg.to_dict(),
                    "files": [{"path": p.name, "sha256": _sha256(p)} for p in files]}
        _write_json(self.path("manifest.json"), manifest)
        return manifest


def run_pipeline(config: PipelineConfig, out_dir) -> dict:
    """Run every stage, writing artifacts into ``out_dir``.

    Output is assembled in a sibling temporary directory and moved into
    place only on success, so a failed run leaves nothing behind. Returns
    the manifest (relative file names with SHA-256 hashes).
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.tmp-", dir=out_dir.parent))
    run = _Run(config, tmp)
    try:
        manifest = run.run()
    except Exception as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise PipelineError(run.stage, exc) from exc
    if out_dir.exists():
        shutil.rmtree(out_dir)
    os.replace(tmp, out_dir)
    return manifest
