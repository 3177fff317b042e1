"""Symbolic dynamics of multi-layer cellular neural networks.

From the real template parameters of a layered network this package builds
the admissible local patterns, the solution-space shift of finite type, the
sofic hidden/output spaces with their right-resolving covers, decides the
existence of factor maps between layers, computes maximal measures and
Hausdorff dimensions, and renders the associated fractal sets.
"""

__version__ = "0.1.0"

from .errors import (
    BoundaryParameter, DegenerateTemplate, DepthLimit, EmptyComposition,
    EmptyShift, IncompatibleLabels, McnnError, NoConvergence, NotIrreducible,
    OracleLimit, SupportMismatch,
)
from .templates import (
    BasicSet, LayerTemplate, LocalPattern, NetworkTemplate, RegionSignature,
    classify_region, compose_network, layer_admissible_patterns, load_network,
    network_basic_set, survey_layer1_regions, survey_layer2_regions,
)
from .shifts import (
    Presentation, SymbolicMatrix, TransitionMatrix, WordCount,
    build_transition_matrix, count_words, enumerate_words,
    layer_labeled_graph, matrix_text, periodic_counts, presentation_text,
    structure_flags, subset_construction, vertex_presentation,
)
from .spectral import (
    DimensionResult, MarkovMeasure, PerronData, hausdorff_dimension,
    markov_entropy, maximal_measure, perron, stochasticize,
    topological_entropy,
)
from .factors import (
    FactorDecision, FactorLikeMatrix, OneBlockMap, SyncReport,
    classify_relation, embedding_condition, factor_periodic_condition,
    induced_map_from_e, search_factor_like_incidence,
    search_factor_like_symbolic, synchronizing_analysis,
)
from .measures import (
    BlockFamily, LinearRepresentation, MarkovCertificate, build_block_family,
    check_markov_condition, cylinder_probability, measure_from_certificate,
    pushforward_representation, uniform_factor_test,
)
from .fractal import (
    FractalImage, FractalSpec, expansion_rectangle, render, render_figure,
    total_area, write_pgm, write_rectangles,
)
from .pipeline import (
    PipelineOptions, analyze_network, parse_report, run_pipeline,
    serialize_report,
)
