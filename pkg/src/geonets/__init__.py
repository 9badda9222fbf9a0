"""Geographical networks from gridded precipitation time series.

Build correlation and mutual-information networks over grid cells with a
global threshold or a disparity-filter backbone, compare them against
configuration-model and random-graph baselines, and relate topological to
geographical distance.
"""

from .estimators import BackboneNetwork, SimilarityTransformer, ThresholdNetwork
from .geoanalysis import (DistancePairSet, EdgeLengthStats, RegressionResult,
                          distance_pairs, edge_length_stats, regress, weight_histogram)
from .graph import GeoGraph
from .grid import (GridCell, GridFormatError, GridSeries, RegionMask,
                   apply_mask_and_filter, dbz_to_rain_rate, load_grid, load_mask)
from .metrics import (MetricsReport, UndefinedMetricError, components, diameter,
                      full_report, heterogeneity, mean_clustering, mean_shortest_path)
from .netbuild import (BackboneCalibration, ThresholdScan, backbone_graph,
                       calibrate_alpha, disparity_pvalue, scan_max_diameter_threshold,
                       shared_edges, threshold_graph)
from .nullmodels import (EnsembleReport, ErAnalytics, configuration_sample,
                         ensemble_metrics, er_analytics, small_world_test)
from .pipeline import PipelineConfig, run_pipeline
from .similarity import (SimilarityMatrix, mutual_information, pearson,
                         similarity_matrix)
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
