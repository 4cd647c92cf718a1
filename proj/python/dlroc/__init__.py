"""Robust dictionary-learning sparse representation classifier."""

from ._core import (
    ClassificationResult,
    Dataset,
    DlrocError,
    Model,
    avg_mutual_coherence,
    cross_block_coherence,
    energy_ratios,
    fit,
    generate_synthetic,
    gram,
    hybrid_norm,
    hybrid_objective,
    learn,
    load_csv,
    load_model,
    lpq_norm,
    mutual_coherence,
    normalize_columns,
    save_csv,
    solve_scalar_subproblem,
    sparse_code_hybrid,
    sparse_code_omp,
)

__all__ = [
    "ClassificationResult",
    "Dataset",
    "DlrocError",
    "Model",
    "avg_mutual_coherence",
    "cross_block_coherence",
    "energy_ratios",
    "fit",
    "generate_synthetic",
    "gram",
    "hybrid_norm",
    "hybrid_objective",
    "learn",
    "load_csv",
    "load_model",
    "lpq_norm",
    "mutual_coherence",
    "normalize_columns",
    "save_csv",
    "solve_scalar_subproblem",
    "sparse_code_hybrid",
    "sparse_code_omp",
]
