"""Semi-supervised label propagation on hypergraphs built by k-means clustering."""
from .evaluation import ConfusionCounts, comparison_report, confusion, sensitivity
from .graph import WeightedGraph, graph_laplacian, graph_propagation_matrix, knn_gaussian_graph
from .hypergraph import (
    DegreeData,
    Hypergraph,
    InvalidHypergraph,
    LaplacianKind,
    compute_degrees,
    laplacian,
    propagation_matrix,
    quadratic_form_oracle,
)
from .partition import ClusterAssignment, WeightingRule, build_hypergraph, kmeans
from .solvers import (
    EstimateMatrix,
    LabelMatrix,
    Mode,
    SolverConfig,
    initial_labels,
    predict,
    propagate_iterative,
    solve_propagation_closed,
    solve_sym_regularized,
    solve_unnormalized,
)

__version__ = "0.1.0"
