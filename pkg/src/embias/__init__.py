"""Measure and remove social association biases in word embeddings.

The pipeline: load an embedding table, resolve association test word
lists against it, measure target/attribute associations with permutation
significance (word level or sentence level via templates), identify bias
directions, and transform the table to remove them.
"""

__version__ = "0.1.0"

from .debias import (
    ComparisonRow,
    DebiasPlan,
    apply_plan,
    evaluate_before_after,
    hard_debias,
    linear_project,
    load_plan,
    lpsg_debias,
    lpsg_direction,
    religion_direction,
)
from .embeddings import (
    EmbeddingTable,
    cosine,
    load_embeddings,
    unit,
    write_embeddings,
)
from .lexicon import (
    AssociationTest,
    ResolvedTest,
    WordList,
    builtin_suites,
    dump_suite,
    load_suite,
    resolve,
    translated_suite,
    with_devanagari,
)
from .report import (
    audit_doc,
    audit_markdown,
    canonical_json,
    comparison_doc,
    comparison_markdown,
    report_schema,
    run_config,
)
from .seat import (
    SentenceTable,
    TemplateSet,
    build_seat_test,
    builtin_templates,
    collect_sentences,
    compose_sentence,
    compose_table,
    ingest_precomputed,
    load_templates,
    resolve_seat,
    run_seat,
    write_sentences,
)
from .subspace import (
    BiasDirection,
    direction_from_list_pca,
    direction_from_pair,
    direction_from_pairs_pca,
    direction_from_spec,
    directions_table,
    orthogonalize,
    top_principal_component,
)
from .weat import (
    PermutationPlan,
    TestResult,
    effect_size,
    p_value,
    run_tests,
    run_weat,
    test_statistic,
    word_association,
)

__all__ = [
    "__version__",
    "AssociationTest",
    "BiasDirection",
    "ComparisonRow",
    "DebiasPlan",
    "EmbeddingTable",
    "PermutationPlan",
    "ResolvedTest",
    "SentenceTable",
    "TemplateSet",
    "TestResult",
    "WordList",
    "apply_plan",
    "audit_doc",
    "audit_markdown",
    "build_seat_test",
    "builtin_suites",
    "builtin_templates",
    "canonical_json",
    "collect_sentences",
    "comparison_doc",
    "comparison_markdown",
    "compose_sentence",
    "compose_table",
    "cosine",
    "direction_from_list_pca",
    "direction_from_pair",
    "direction_from_pairs_pca",
    "direction_from_spec",
    "directions_table",
    "dump_suite",
    "effect_size",
    "evaluate_before_after",
    "hard_debias",
    "ingest_precomputed",
    "linear_project",
    "load_embeddings",
    "load_plan",
    "load_suite",
    "load_templates",
    "lpsg_debias",
    "lpsg_direction",
    "orthogonalize",
    "p_value",
    "religion_direction",
    "report_schema",
    "resolve",
    "resolve_seat",
    "run_config",
    "run_seat",
    "run_tests",
    "run_weat",
    "test_statistic",
    "top_principal_component",
    "translated_suite",
    "unit",
    "with_devanagari",
    "word_association",
    "write_embeddings",
    "write_sentences",
]
