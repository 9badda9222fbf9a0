"""scikit-learn compatible wrappers around the functional API.

Series are passed as arrays of shape ``(n_nodes, n_times)``, one row per
grid cell, or as a :class:`~geonets.grid.GridSeries`. Network estimators
take a square similarity matrix (array or
:class:`~geonets.similarity.SimilarityMatrix`) as ``X``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_alpha, check_series_matrix, check_similarity
from .grid import GridSeries, as_series_array
from .netbuild import (backbone_graph, backbone_pvalues, calibrate_alpha,
                       scan_max_diameter_threshold, threshold_graph)
from .similarity import SimilarityMatrix, cross_similarity, similarity_matrix


def _as_similarity(X, measure="PC"):
    if isinstance(X, SimilarityMatrix):
        return X
    return SimilarityMatrix(check_similarity(X), measure)


def _adjacency(graph):
    return graph.adjacency().toarray().astype(np.int8)


class SimilarityTransformer(TransformerMixin, BaseEstimator):
    """Pairwise Pearson or histogram-MI similarity between series.

    ``fit`` stores the reference series; ``transform`` returns the
    similarity of each new series to every reference series. ``fit_transform``
    returns the square matrix with its diagonal fixed at 0.

    Parameters
    ----------
    measure : {"PC", "MI"}
    mi_bins : int or None
        Bins per axis for MI; ``None`` uses Sturges' rule.
    mi_normalization : {"max_entropy", "none"}
    """

    def __init__(self, measure="PC", mi_bins=None, mi_normalization="max_entropy"):
        self.measure = measure
        self.mi_bins = mi_bins
        self.mi_normalization = mi_normalization

    def fit(self, X, y=None):
        self.similarity_ = similarity_matrix(X, self.measure, self.mi_bins,
                                             self.mi_normalization)
        self.reference_ = check_series_matrix(as_series_array(X))
        self.n_features_in_ = self.reference_.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        X = check_series_matrix(as_series_array(X))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected series of length {self.n_features_in_}, "
                             f"got {X.shape[1]}")
        return cross_similarity(X, self.reference_, self.measure,
                                self.similarity_.mi_bins or self.mi_bins,
                                self.mi_normalization)

    def fit_transform(self, X, y=None):
        return self.fit(X).similarity_.values.copy()


class ThresholdNetwork(TransformerMixin, BaseEstimator):
    """Global-threshold network.

    With ``tau=None`` the threshold is chosen by a maximum-diameter scan
    over ``taus`` (default: every distinct pair weight for up to 1000 nodes,
    200 grid points above that).

    Attributes
    ----------
    tau_ : float
    scan_ : ThresholdScan or None
    graph_ : GeoGraph
    """

    def __init__(self, tau=None, taus=None, strict=True, nodes=None):
        self.tau = tau
        self.taus = taus
        self.strict = strict
        self.nodes = nodes

    def fit(self, X, y=None):
        sim = _as_similarity(X)
        if self.tau is None:
            self.scan_ = scan_max_diameter_threshold(sim, self.taus, self.strict)
            self.tau_ = self.scan_.chosen_tau
        else:
            self.scan_ = None
            self.tau_ = float(self.tau)
        self.graph_ = threshold_graph(sim, self.tau_, self.strict, self.nodes)
        self.n_features_in_ = sim.n
        return self

    def transform(self, X):
        """0/1 adjacency matrix of ``X`` thresholded at ``tau_``."""
        check_is_fitted(self, "tau_")
        return _adjacency(threshold_graph(_as_similarity(X), self.tau_, self.strict))


class BackboneNetwork(TransformerMixin, BaseEstimator):
    """Disparity-filter backbone at a fixed ``alpha`` or calibrated to
    ``target_edges``.

    Attributes
    ----------
    alpha_ : float
    calibration_ : BackboneCalibration or None
    pvalues_ : ndarray
        Smaller endpoint p-value for each substrate pair, as a square matrix
        (1 where no substrate edge exists).
    graph_ : GeoGraph
    """

    def __init__(self, alpha=None, target_edges=None, nodes=None):
        self.alpha = alpha
        self.target_edges = target_edges
        self.nodes = nodes

    def fit(self, X, y=None):
        if (self.alpha is None) == (self.target_edges is None):
            raise ValueError("set exactly one of alpha or target_edges")
        sim = _as_similarity(X)
        if self.alpha is None:
            self.calibration_ = calibrate_alpha(sim, int(self.target_edges))
            self.alpha_ = self.calibration_.alpha
        else:
            check_alpha(self.alpha)
            self.calibration_ = None
            self.alpha_ = float(self.alpha)
        i, j, _, p_i, p_j = backbone_pvalues(sim)
        self.pvalues_ = np.ones((sim.n, sim.n))
        self.pvalues_[i, j] = self.pvalues_[j, i] = np.minimum(p_i, p_j)
        self.graph_ = backbone_graph(sim, self.alpha_, self.nodes)
        self.n_features_in_ = sim.n
        return self

    def transform(self, X):
        """0/1 adjacency matrix of the backbone of ``X`` at ``alpha_``."""
        check_is_fitted(self, "alpha_")
        return _adjacency(backbone_graph(_as_similarity(X), self.alpha_))


__all__ = ["SimilarityTransformer", "ThresholdNetwork", "BackboneNetwork",
           "GridSeries"]
