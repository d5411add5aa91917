"""Ingredient-substitution dataset tooling: normalization, clustering,
Hit@1 evaluation, dataset filtration, fine-tune exports, and phytochemical
recipe enrichment. The heavy lifting lives in the _phytosub extension."""

from ._phytosub import (  # noqa: F401
    CuratedGroups,
    EvaluationReport,
    FrequencyBaseline,
    IngredientClustering,
    MockBackend,
    PhytoTable,
    Recipe,
    SplitStats,
    SubstitutionRecord,
    aggregate_runs,
    build_category_prompt,
    build_validity_prompt,
    category_names,
    cluster_ingredients,
    compute_split_stats,
    emit_manifest,
    enrich_corpus,
    estimate_token_length,
    export_chat,
    export_prompt_completion,
    filter_salads,
    fold_plural,
    hit_at_1,
    load_phyto_table,
    load_recipes,
    load_substitutions,
    normalize_name,
    parse_category,
    parse_predictions,
    parse_validity_label,
    rank_recipes,
    recipe_phyto_score,
    run_filtration_mock,
    same_cluster,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
