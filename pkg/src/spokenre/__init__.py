"""Toolkit for building, filtering, and scoring speech relation extraction corpora."""

from .adaptor import AdaptorSpec, DEFAULT_ADAPTOR, ParamBudget, output_length, trainable_fraction
from .align import (
    AlignmentResult,
    best_fuzzy_substring,
    edit_distance,
    fuzzy_ratio,
    levenshtein,
    relabel_instance,
    wer,
)
from .augment import DropRecord, default_pronouns, filter_pseudo, sample_per_relation
from .codec import (
    NormalizationPolicy,
    ParseError,
    ParseWarning,
    linearize,
    normalize_surface,
    parse_lenient,
    parse_strict,
)
from .corpus import (
    DatasetStats,
    build_manifest,
    compute_stats,
    plan_upsampling,
    select_human_subset,
    subset_top_k_relations,
)
from .manifest import (
    Manifest,
    ManifestError,
    RelationInstance,
    Triplet,
    read_manifest,
    write_manifest,
)
from .scoring import (
    RELAXED_POLICY,
    STRICT_POLICY,
    EvalReport,
    FacetScore,
    evaluate_corpus,
    score_entities,
    score_relations,
    score_triplets,
)

__version__ = "0.1.0"
