"""Zooming Ising-anneal boosting of augmented weak classifiers.

Train a strong binary classifier by iteratively minimizing Ising problems
over an augmented set of threshold classifiers, shrinking the search
breadth each iteration.  Ships a simulated-annealing solver, an exhaustive
exact solver, single-shot and least-squares baselines, ROC/AUROC tooling
with Poisson error bars, and a reproducible CLI (``qamlz``).
"""

__version__ = "0.1.0"

from .data import (
    CsvFormatError,
    Dataset,
    SplitDataset,
    generate_synthetic,
    load_csv,
    save_csv,
    split,
)
from .weak import (
    AugmentedClassifierSet,
    CorrelationCache,
    WeakClassifierBank,
    build_bank,
    build_cache,
    evaluate_augmented,
)
from .ising import (
    IsingProblem,
    SpinState,
    apply_gauge,
    build_qaml,
    build_zoom,
    energy_of,
    prune,
    random_gauge,
)
from .anneal import (
    AnnealResult,
    ExactSolver,
    ExcitedStateCriteria,
    SaSchedule,
    SaSolver,
    Solver,
    SolverCapacityError,
    select_excited,
    solve_exact,
    solve_sa,
)
from .zoom import (
    EnsembleMember,
    ZoomConfig,
    ZoomOutcome,
    ZoomRecord,
    ZoomState,
    flips_disabled,
    initial_state,
    normalized_training_energy,
    regularize_flips,
    run_zoom,
    sigma_at,
    update_mu,
)
from .evaluate import (
    RocCurve,
    StrongClassifier,
    auroc_error,
    ensemble_roc,
    roc,
    score,
    squared_error_and_gradient,
    train_lr,
    train_qaml,
)
from .seeds import mix64, spawn

__all__ = [
    "__version__",
    "CsvFormatError",
    "Dataset",
    "SplitDataset",
    "generate_synthetic",
    "load_csv",
    "save_csv",
    "split",
    "AugmentedClassifierSet",
    "CorrelationCache",
    "WeakClassifierBank",
    "build_bank",
    "build_cache",
    "evaluate_augmented",
    "IsingProblem",
    "SpinState",
    "apply_gauge",
    "build_qaml",
    "build_zoom",
    "energy_of",
    "prune",
    "random_gauge",
    "AnnealResult",
    "ExactSolver",
    "ExcitedStateCriteria",
    "SaSchedule",
    "SaSolver",
    "Solver",
    "SolverCapacityError",
    "select_excited",
    "solve_exact",
    "solve_sa",
    "EnsembleMember",
    "ZoomConfig",
    "ZoomOutcome",
    "ZoomRecord",
    "ZoomState",
    "flips_disabled",
    "initial_state",
    "normalized_training_energy",
    "regularize_flips",
    "run_zoom",
    "sigma_at",
    "update_mu",
    "RocCurve",
    "StrongClassifier",
    "auroc_error",
    "ensemble_roc",
    "roc",
    "score",
    "squared_error_and_gradient",
    "train_lr",
    "train_qaml",
    "mix64",
    "spawn",
]
