"""
transforms - 18 种语义保持变换、自然度评分与变体语料构建
"""

from .base import (
    TransformId,
    TransformResult,
    TransformContext,
    apply,
    applicable_transforms,
)
from .naming import SynonymNameProvider
from .naturalness import LanguageModelScorer, NaturalnessScore, NgramScorer, naturalness, tokenize
from .diverse import (
    ScoredVariant,
    applicability_matrix,
    build_diverse,
    export_applicability,
    export_naturalness,
    generate_variants,
    natural_corpus,
    resolve_transforms,
    score_variants,
    select_natural,
    variant_id,
)

__all__ = [
    "TransformId",
    "TransformResult",
    "TransformContext",
    "apply",
    "applicable_transforms",
    "SynonymNameProvider",
    "LanguageModelScorer",
    "NaturalnessScore",
    "NgramScorer",
    "naturalness",
    "tokenize",
    "ScoredVariant",
    "applicability_matrix",
    "build_diverse",
    "export_applicability",
    "export_naturalness",
    "generate_variants",
    "natural_corpus",
    "resolve_transforms",
    "score_variants",
    "select_natural",
    "variant_id",
]
