"""Command-line entry point: gen-data, train, sweep, show.

Runs are driven by a JSON config (every field optional except the seed,
which may also come from --seed or the QAMLZ_SEED environment variable);
command-line flags override config values.  All outputs are deterministic
functions of (config, seed): artifacts are JSON with a "schema": 1 field,
tables are CSV with a header row, and floats are serialized with repr so
identical runs produce identical bytes.

Exit codes: 0 success, 1 runtime/IO failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import __version__
from .anneal import ExactSolver, SaSchedule, SaSolver, Solver
from .data import Dataset, generate_synthetic, load_csv, save_csv, split
from .evaluate import (
    RocCurve,
    StrongClassifier,
    auroc_error,
    ensemble_roc,
    roc,
    train_lr,
    train_qaml,
)
from .seeds import spawn
from .weak import AugmentedClassifierSet, CorrelationCache, build_bank, build_cache
from .zoom import ZoomConfig, run_zoom

METHODS = ("qaml-z", "sa-z", "sae-z", "qaml", "lr")
ZOOM_METHODS = ("qaml-z", "sa-z", "sae-z")

# Stable tags for deriving child seeds inside one run.
_SEED_DATA = 1
_SEED_SPLIT = 2
_SEED_TEST_DATA = 3
_SEED_TRAIN_BASE = 10
_SEED_ERROR_BASE = 40
_SEED_SWEEP_CELL = 400


# --------------------------------------------------------------------------
# configuration


def _check_keys(payload: dict, allowed: tuple[str, ...], where: str) -> None:
    extra = sorted(set(payload) - set(allowed))
    if extra:
        raise ValueError(f"unknown key(s) in {where}: {', '.join(extra)}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters (defaults applied, flags folded in)."""

    seed: int
    data_csv: Optional[str]
    data_header: bool
    synthetic: dict
    train_fraction: float
    offset_bound: int
    step: float
    full_cross_terms: bool
    zoom: ZoomConfig
    solver_kind: str
    sa_schedule: SaSchedule
    deep_schedule: SaSchedule
    exact_max_states: int
    methods: tuple[str, ...]
    qaml_regularization: float
    qaml_augmented: bool
    lr_epochs: int
    lr_learning_rate: Optional[float]
    lr_augmented: bool
    resamples: int
    grid_size: int
    sweep_sizes: tuple[int, ...]
    sweep_replicates: int
    sweep_test_size: int

    def to_dict(self) -> dict:
        data = (
            {"csv": self.data_csv, "header": self.data_header}
            if self.data_csv is not None
            else {"synthetic": dict(self.synthetic)}
        )
        return {
            "schema": 1,
            "seed": self.seed,
            "data": data,
            "train_fraction": self.train_fraction,
            "augmentation": {
                "offset_bound": self.offset_bound,
                "step": self.step,
                "full_cross_terms": self.full_cross_terms,
            },
            "zoom": {
                "zoom_base": self.zoom.zoom_base,
                "iterations": self.zoom.iterations,
                "worse_flip_probs": list(self.zoom.worse_flip_probs),
                "uniform_flip_probs": list(self.zoom.uniform_flip_probs),
                "excited_distances": list(self.zoom.excited_distances),
                "excited_caps": list(self.zoom.excited_caps),
                "keep_fraction": self.zoom.keep_fraction,
                "gauge_counts": list(self.zoom.gauge_counts),
            },
            "solver": {
                "kind": self.solver_kind,
                "beta_initial": self.sa_schedule.beta_initial,
                "beta_final": self.sa_schedule.beta_final,
                "sweeps": self.sa_schedule.sweeps,
                "reads": self.sa_schedule.reads,
                "deep_sweeps": self.deep_schedule.sweeps,
                "deep_reads": self.deep_schedule.reads,
                "exact_max_states": self.exact_max_states,
            },
            "methods": list(self.methods),
            "qaml": {
                "regularization": self.qaml_regularization,
                "augmented": self.qaml_augmented,
            },
            "lr": {
                "epochs": self.lr_epochs,
                "learning_rate": self.lr_learning_rate,
                "augmented": self.lr_augmented,
            },
            "evaluation": {
                "resamples": self.resamples,
                "grid_size": self.grid_size,
            },
            "sweep": {
                "sizes": list(self.sweep_sizes),
                "replicates": self.sweep_replicates,
                "test_size": self.sweep_test_size,
            },
        }


def config_from_dict(payload: dict, seed_override: Optional[int] = None) -> RunConfig:
    _check_keys(
        payload,
        (
            "schema",
            "seed",
            "data",
            "train_fraction",
            "augmentation",
            "zoom",
            "solver",
            "methods",
            "qaml",
            "lr",
            "evaluation",
            "sweep",
        ),
        "config",
    )
    if payload.get("schema", 1) != 1:
        raise ValueError(f"unsupported config schema: {payload.get('schema')}")

    seed = seed_override
    if seed is None:
        seed = payload.get("seed")
    if seed is None and os.environ.get("QAMLZ_SEED"):
        seed = int(os.environ["QAMLZ_SEED"])
    if seed is None:
        raise ValueError(
            "a seed is required: pass --seed, set \"seed\" in the config, "
            "or set QAMLZ_SEED"
        )

    data = payload.get("data", {})
    _check_keys(data, ("csv", "header", "synthetic"), "data")
    data_csv = data.get("csv")
    if data_csv is not None and "synthetic" in data:
        raise ValueError("data must specify either csv or synthetic, not both")
    synthetic = {
        "n_signal": 1000,
        "n_background": 1000,
        "n_features": 8,
        "separation": 2.0,
    }
    if "synthetic" in data:
        _check_keys(data["synthetic"], tuple(synthetic), "data.synthetic")
        synthetic.update(data["synthetic"])

    augmentation = payload.get("augmentation", {})
    _check_keys(augmentation, ("offset_bound", "step", "full_cross_terms"), "augmentation")

    zoom_payload = dict(payload.get("zoom", {}))
    _check_keys(
        zoom_payload,
        (
            "zoom_base",
            "iterations",
            "worse_flip_probs",
            "uniform_flip_probs",
            "excited_distances",
            "excited_caps",
            "keep_fraction",
            "gauge_counts",
        ),
        "zoom",
    )
    for key in ("worse_flip_probs", "uniform_flip_probs", "excited_distances"):
        if key in zoom_payload:
            zoom_payload[key] = tuple(zoom_payload[key])
    for key in ("excited_caps", "gauge_counts"):
        if key in zoom_payload:
            zoom_payload[key] = tuple(zoom_payload[key])
    zoom = ZoomConfig(seed=0, **zoom_payload)

    solver = payload.get("solver", {})
    _check_keys(
        solver,
        (
            "kind",
            "beta_initial",
            "beta_final",
            "sweeps",
            "reads",
            "deep_sweeps",
            "deep_reads",
            "exact_max_states",
        ),
        "solver",
    )
    solver_kind = solver.get("kind", "sa")
    if solver_kind not in ("sa", "exact"):
        raise ValueError("solver.kind must be 'sa' or 'exact'")
    beta_initial = float(solver.get("beta_initial", 0.1))
    beta_final = float(solver.get("beta_final", 5.0))
    sa_schedule = SaSchedule(
        beta_initial=beta_initial,
        beta_final=beta_final,
        sweeps=int(solver.get("sweeps", 1000)),
        reads=int(solver.get("reads", 1000)),
    )
    deep_schedule = SaSchedule(
        beta_initial=beta_initial,
        beta_final=beta_final,
        sweeps=int(solver.get("deep_sweeps", 5000)),
        reads=int(solver.get("deep_reads", 5000)),
    )

    methods = tuple(payload.get("methods", ["qaml-z", "qaml", "lr"]))
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method '{m}'; choose from {', '.join(METHODS)}")
    if len(set(methods)) != len(methods):
        raise ValueError("duplicate method names")

    qaml = payload.get("qaml", {})
    _check_keys(qaml, ("regularization", "augmented"), "qaml")
    lr = payload.get("lr", {})
    _check_keys(lr, ("epochs", "learning_rate", "augmented"), "lr")
    evaluation = payload.get("evaluation", {})
    _check_keys(evaluation, ("resamples", "grid_size"), "evaluation")
    sweep = payload.get("sweep", {})
    _check_keys(sweep, ("sizes", "replicates", "test_size"), "sweep")

    return RunConfig(
        seed=int(seed),
        data_csv=data_csv,
        data_header=bool(data.get("header", False)),
        synthetic=synthetic,
        train_fraction=float(payload.get("train_fraction", 0.5)),
        offset_bound=int(augmentation.get("offset_bound", 3)),
        step=float(augmentation.get("step", 0.0075)),
        full_cross_terms=bool(augmentation.get("full_cross_terms", False)),
        zoom=zoom,
        solver_kind=solver_kind,
        sa_schedule=sa_schedule,
        deep_schedule=deep_schedule,
        exact_max_states=int(solver.get("exact_max_states", 64)),
        methods=methods,
        qaml_regularization=float(qaml.get("regularization", 0.0)),
        qaml_augmented=bool(qaml.get("augmented", False)),
        lr_epochs=int(lr.get("epochs", 500)),
        lr_learning_rate=lr.get("learning_rate"),
        lr_augmented=bool(lr.get("augmented", False)),
        resamples=int(evaluation.get("resamples", 100)),
        grid_size=int(evaluation.get("grid_size", 1001)),
        sweep_sizes=tuple(int(v) for v in sweep.get("sizes", [100, 200, 400])),
        sweep_replicates=int(sweep.get("replicates", 3)),
        sweep_test_size=int(sweep.get("test_size", 2000)),
    )


def _load_config(args) -> RunConfig:
    payload: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as handle:
            payload = json.load(handle)
        if not isinstance(payload, dict):
            raise ValueError("config file must contain a JSON object")
    cfg = config_from_dict(payload, seed_override=getattr(args, "seed", None))
    if getattr(args, "method", None):
        cfg = replace(cfg, methods=tuple(dict.fromkeys(args.method)))
    if getattr(args, "solver", None):
        cfg = replace(cfg, solver_kind=args.solver)
    if getattr(args, "regularization", None) is not None:
        cfg = replace(cfg, qaml_regularization=args.regularization)
    if getattr(args, "sizes", None):
        cfg = replace(cfg, sweep_sizes=tuple(int(v) for v in args.sizes.split(",")))
    if getattr(args, "replicates", None) is not None:
        cfg = replace(cfg, sweep_replicates=args.replicates)
    return cfg


# --------------------------------------------------------------------------
# shared run machinery


def _configured_solver(cfg: RunConfig) -> Solver:
    if cfg.solver_kind == "exact":
        return ExactSolver(max_states=cfg.exact_max_states)
    return SaSolver(schedule=cfg.sa_schedule)


class _Caches:
    """Lazily built classifier banks and correlation caches for one split."""

    def __init__(self, cfg: RunConfig, train: Dataset):
        self._cfg = cfg
        self._train = train
        self._bank = None
        self._by_offset: dict[int, CorrelationCache] = {}

    @property
    def bank(self):
        if self._bank is None:
            self._bank = build_bank(self._train)
        return self._bank

    def cache(self, offset_bound: int) -> CorrelationCache:
        if offset_bound not in self._by_offset:
            cset = AugmentedClassifierSet(
                bank=self.bank, offset_bound=offset_bound, step=self._cfg.step
            )
            self._by_offset[offset_bound] = build_cache(
                cset, self._train, full_cross_terms=self._cfg.full_cross_terms
            )
        return self._by_offset[offset_bound]

    def zoom_cache(self) -> CorrelationCache:
        return self.cache(self._cfg.offset_bound)

    def baseline_cache(self, augmented: bool) -> CorrelationCache:
        return self.cache(self._cfg.offset_bound if augmented else 0)


def _train_members(
    method: str, cfg: RunConfig, caches: _Caches, train: Dataset, train_seed: int
):
    """Train one method; returns (ensemble members, trace records or None)."""
    if method in ZOOM_METHODS:
        if method == "sae-z":
            solver: Solver = SaSolver(schedule=cfg.deep_schedule)
        elif method == "sa-z":
            solver = SaSolver(schedule=cfg.sa_schedule)
        else:
            solver = _configured_solver(cfg)
        cache = caches.zoom_cache()
        outcome = run_zoom(cache, solver, replace(cfg.zoom, seed=train_seed))
        members = outcome.ensemble if method != "sa-z" else outcome.ensemble[:1]
        classifiers = [
            StrongClassifier(weights=m.weights, classifier_set=cache.classifier_set)
            for m in members
        ]
        return classifiers, outcome.trace
    if method == "qaml":
        cache = caches.baseline_cache(cfg.qaml_augmented)
        clf = train_qaml(
            cache, cfg.qaml_regularization, _configured_solver(cfg), seed=train_seed
        )
        return [clf], None
    if method == "lr":
        cache = caches.baseline_cache(cfg.lr_augmented)
        clf = train_lr(
            train,
            cache.classifier_set,
            epochs=cfg.lr_epochs,
            learning_rate=cfg.lr_learning_rate,
            seed=train_seed,
        )
        return [clf], None
    raise ValueError(f"unknown method '{method}'")


def _evaluate_members(
    classifiers: list[StrongClassifier],
    dataset: Dataset,
    cfg: RunConfig,
    err_seed: int,
) -> RocCurve:
    """ROC of one method on one dataset; ensembles use the supremum curve.

    The statistical error always comes from Poisson-reweighting the lead
    member's scores (for ensembles the envelope has no single score vector).
    """
    lead_scores = classifiers[0].scores(dataset.features)
    if len(classifiers) == 1:
        curve = roc(lead_scores, dataset.labels)
    else:
        curve = ensemble_roc(classifiers, dataset, grid_size=cfg.grid_size)
    err = auroc_error(
        lead_scores, dataset.labels, resamples=cfg.resamples, seed=err_seed
    )
    return curve.with_error(err)


def _run_one_method(
    method: str,
    cfg: RunConfig,
    caches: _Caches,
    train: Dataset,
    test: Dataset,
    run_seed: int,
    want_train_metrics: bool = True,
) -> dict:
    idx = METHODS.index(method)
    started = time.perf_counter()
    classifiers, trace = _train_members(
        method, cfg, caches, train, spawn(run_seed, _SEED_TRAIN_BASE + idx)
    )
    test_curve = _evaluate_members(
        classifiers, test, cfg, spawn(run_seed, _SEED_ERROR_BASE + idx, 1)
    )
    result = {
        "test_auroc": test_curve.auroc,
        "test_auroc_error": test_curve.auroc_error,
        "n_members": len(classifiers),
        "seconds": round(time.perf_counter() - started, 3),
        "test_roc": [[float(e), float(r)] for e, r in test_curve.points],
    }
    if want_train_metrics:
        train_curve = _evaluate_members(
            classifiers, train, cfg, spawn(run_seed, _SEED_ERROR_BASE + idx, 0)
        )
        result["train_auroc"] = train_curve.auroc
        result["train_auroc_error"] = train_curve.auroc_error
    if trace is not None:
        cset = classifiers[0].classifier_set
        entries = []
        for record in trace:
            snapshot = StrongClassifier(
                weights=np.array(record.mu), classifier_set=cset
            )
            entry = record.to_dict()
            entry["test_auroc"] = roc(
                snapshot.scores(test.features), test.labels
            ).auroc
            entries.append(entry)
        result["trace"] = entries
    return result


def _prepare_split(cfg: RunConfig, run_seed: int):
    if cfg.data_csv is not None:
        dataset = load_csv(cfg.data_csv, header=cfg.data_header)
    else:
        dataset = generate_synthetic(
            n_signal=int(cfg.synthetic["n_signal"]),
            n_background=int(cfg.synthetic["n_background"]),
            n_features=int(cfg.synthetic["n_features"]),
            separation=float(cfg.synthetic["separation"]),
            seed=spawn(run_seed, _SEED_DATA),
        )
    return split(dataset, cfg.train_fraction, seed=spawn(run_seed, _SEED_SPLIT))


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _format_table(methods: dict) -> str:
    rows = [["method", "train_auroc", "test_auroc", "members", "seconds"]]
    for name, res in methods.items():
        train_txt = (
            f"{res['train_auroc']:.6f} ± {res['train_auroc_error']:.6f}"
            if "train_auroc" in res
            else "-"
        )
        rows.append(
            [
                name,
                train_txt,
                f"{res['test_auroc']:.6f} ± {res['test_auroc_error']:.6f}",
                str(res["n_members"]),
                str(res["seconds"]),
            ]
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    )


# --------------------------------------------------------------------------
# subcommands


def cmd_gen_data(args) -> int:
    seed = args.seed
    if seed is None and os.environ.get("QAMLZ_SEED"):
        seed = int(os.environ["QAMLZ_SEED"])
    if seed is None:
        raise ValueError("a seed is required: pass --seed or set QAMLZ_SEED")
    dataset = generate_synthetic(
        n_signal=args.signal,
        n_background=args.background,
        n_features=args.features,
        separation=args.sep,
        seed=seed,
    )
    save_csv(dataset, args.out)
    n_pos = int((dataset.labels == 1).sum())
    print(
        f"wrote {args.out}: {dataset.n_examples} examples, "
        f"{dataset.n_features} features, {n_pos} signal / "
        f"{dataset.n_examples - n_pos} background"
    )
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    os.makedirs(args.out, exist_ok=True)
    pair = _prepare_split(cfg, cfg.seed)
    caches = _Caches(cfg, pair.train)
    results: dict[str, dict] = {}
    for method in cfg.methods:
        results[method] = _run_one_method(
            method, cfg, caches, pair.train, pair.test, cfg.seed
        )
    artifact = {
        "schema": 1,
        "version": __version__,
        "config": cfg.to_dict(),
        "n_train": pair.train.n_examples,
        "n_test": pair.test.n_examples,
        "methods": results,
    }
    artifact_path = os.path.join(args.out, "artifact.json")
    _atomic_write(artifact_path, json.dumps(artifact, indent=2) + "\n")
    for method, res in results.items():
        lines = ["efficiency,rejection"]
        lines += [f"{e!r},{r!r}" for e, r in res["test_roc"]]
        _atomic_write(
            os.path.join(args.out, f"{method}_test_roc.csv"),
            "\n".join(lines) + "\n",
        )
        if "trace" in res:
            trace_text = "\n".join(json.dumps(entry) for entry in res["trace"])
            _atomic_write(
                os.path.join(args.out, f"{method}_trace.jsonl"), trace_text + "\n"
            )
    print(_format_table(results))
    print(f"artifact: {artifact_path}")
    return 0


def _sweep_cell_data(cfg: RunConfig, size: int, replicate: int, pool: Optional[Dataset]):
    cell_seed = spawn(cfg.seed, _SEED_SWEEP_CELL, size, replicate)
    if pool is not None:
        if not 1 <= size < pool.n_examples:
            raise ValueError(
                f"sweep size {size} must lie in [1, {pool.n_examples - 1}] "
                "for the provided CSV pool"
            )
        pair = split(pool, size / pool.n_examples, seed=spawn(cell_seed, _SEED_SPLIT))
        return pair.train, pair.test, cell_seed
    n_features = int(cfg.synthetic["n_features"])
    separation = float(cfg.synthetic["separation"])
    train = generate_synthetic(
        n_signal=(size + 1) // 2,
        n_background=max(size // 2, 1),
        n_features=n_features,
        separation=separation,
        seed=spawn(cell_seed, _SEED_DATA),
    )
    test = generate_synthetic(
        n_signal=(cfg.sweep_test_size + 1) // 2,
        n_background=max(cfg.sweep_test_size // 2, 1),
        n_features=n_features,
        separation=separation,
        seed=spawn(cell_seed, _SEED_TEST_DATA),
    )
    return train, test, cell_seed


def _run_sweep_cell(cfg: RunConfig, size: int, replicate: int, method: str, pool):
    train, test, cell_seed = _sweep_cell_data(cfg, size, replicate, pool)
    caches = _Caches(cfg, train)
    res = _run_one_method(
        method, cfg, caches, train, test, cell_seed, want_train_metrics=False
    )
    return res["test_auroc"], res["test_auroc_error"]


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if cfg.sweep_replicates < 1:
        raise ValueError("sweep replicates must be >= 1")
    if not cfg.sweep_sizes:
        raise ValueError("sweep needs at least one training size")
    os.makedirs(args.out, exist_ok=True)
    pool = load_csv(cfg.data_csv, header=cfg.data_header) if cfg.data_csv else None

    cells = [
        (size, replicate, method)
        for size in cfg.sweep_sizes
        for replicate in range(cfg.sweep_replicates)
        for method in cfg.methods
    ]
    results: dict[tuple, tuple[float, float]] = {}
    failures: dict[tuple, str] = {}

    def run_cell(cell):
        size, replicate, method = cell
        return cell, _run_sweep_cell(cfg, size, replicate, method, pool)

    if args.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool_ex:
            futures = {pool_ex.submit(run_cell, cell): cell for cell in cells}
            for future in concurrent.futures.as_completed(futures):
                cell = futures[future]
                try:
                    _, value = future.result()
                    results[cell] = value
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    failures[cell] = f"{type(exc).__name__}: {exc}"
    else:
        for cell in cells:
            try:
                _, value = run_cell(cell)
                results[cell] = value
            except Exception as exc:  # noqa: BLE001 - cell isolation
                failures[cell] = f"{type(exc).__name__}: {exc}"

    result_lines = ["size,replicate,method,auroc,auroc_error"]
    for cell in cells:
        if cell in results:
            auroc, err = results[cell]
            result_lines.append(f"{cell[0]},{cell[1]},{cell[2]},{auroc!r},{err!r}")
    _atomic_write(
        os.path.join(args.out, "sweep_results.csv"), "\n".join(result_lines) + "\n"
    )

    summary_lines = ["size,method,mean_auroc,combined_error,n_replicates"]
    for size in cfg.sweep_sizes:
        for method in cfg.methods:
            values = [
                results[(size, r, method)]
                for r in range(cfg.sweep_replicates)
                if (size, r, method) in results
            ]
            if not values:
                continue
            aurocs = np.array([v[0] for v in values])
            errs = np.array([v[1] for v in values])
            # Spread across training sets plus the per-run statistical error,
            # combined in quadrature.
            across = float(np.var(aurocs, ddof=1)) if aurocs.size > 1 else 0.0
            combined = float(np.sqrt(across + np.mean(errs**2)))
            summary_lines.append(
                f"{size},{method},{float(np.mean(aurocs))!r},{combined!r},{aurocs.size}"
            )
    _atomic_write(
        os.path.join(args.out, "sweep_summary.csv"), "\n".join(summary_lines) + "\n"
    )

    if failures:
        failure_lines = ["size,replicate,method,error"]
        for cell in cells:
            if cell in failures:
                msg = failures[cell].replace('"', "'")
                failure_lines.append(f'{cell[0]},{cell[1]},{cell[2]},"{msg}"')
        _atomic_write(
            os.path.join(args.out, "sweep_failures.csv"),
            "\n".join(failure_lines) + "\n",
        )
        print(
            f"{len(failures)} of {len(cells)} cells failed; "
            f"see {os.path.join(args.out, 'sweep_failures.csv')}",
            file=sys.stderr,
        )

    print("\n".join(summary_lines))
    print(f"results: {os.path.join(args.out, 'sweep_results.csv')}")
    return 1 if failures else 0


def cmd_show(args) -> int:
    with open(args.artifact) as handle:
        artifact = json.load(handle)
    if not isinstance(artifact, dict) or "methods" not in artifact:
        raise RuntimeError(f"{args.artifact} is not a run artifact")
    methods: dict = artifact["methods"]
    if args.roc is not None:
        if args.roc not in methods:
            raise RuntimeError(f"no method '{args.roc}' in artifact")
        print("efficiency,rejection")
        for eff, rej in methods[args.roc]["test_roc"]:
            print(f"{eff!r},{rej!r}")
        return 0
    if args.trace is not None:
        name = args.trace or next(
            (m for m in methods if "trace" in methods[m]), None
        )
        if name is None or "trace" not in methods.get(name, {}):
            raise RuntimeError("artifact has no trace records for that method")
        for entry in methods[name]["trace"]:
            print(
                f"t={entry['t']} sigma={entry['sigma']!r} "
                f"training_energy={entry['training_energy']!r} "
                f"test_auroc={entry['test_auroc']!r} "
                f"flips={entry['conditional_flips']}/{entry['uniform_flips']} "
                f"branches={entry['new_branches']}"
            )
        return 0
    print(_format_table(methods))
    return 0


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qamlz",
        description=(
            "Train and evaluate zoomed Ising-anneal ensembles of augmented "
            "weak classifiers, plus baselines."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic two-class CSV dataset")
    g.add_argument("--signal", type=int, required=True, help="rows with label +1")
    g.add_argument("--background", type=int, required=True, help="rows with label -1")
    g.add_argument("--features", type=int, required=True)
    g.add_argument("--sep", type=float, required=True, help="class mean separation")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--out", required=True, help="output CSV path")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train selected methods on one split")
    t.add_argument("--config", help="JSON config path")
    t.add_argument(
        "--method",
        action="append",
        choices=METHODS,
        help="method to run (repeatable; overrides config)",
    )
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--solver", choices=("sa", "exact"))
    t.add_argument(
        "--lambda",
        dest="regularization",
        type=float,
        default=None,
        help="regularization for the single-shot baseline",
    )
    t.add_argument("-o", "--out", default="qamlz_run", help="output directory")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sweep", help="train/evaluate across training-set sizes")
    s.add_argument("--config", help="JSON config path")
    s.add_argument("--sizes", help="comma-separated training sizes")
    s.add_argument("--replicates", type=int, default=None)
    s.add_argument("--method", action="append", choices=METHODS)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1, help="parallel cells")
    s.add_argument("-o", "--out", default="qamlz_sweep", help="output directory")
    s.set_defaults(func=cmd_sweep)

    w = sub.add_parser("show", help="summarize a run artifact")
    w.add_argument("artifact", help="path to artifact.json")
    w.add_argument("--roc", metavar="METHOD", help="dump a method's ROC CSV to stdout")
    w.add_argument(
        "--trace",
        nargs="?",
        const="",
        default=None,
        metavar="METHOD",
        help="dump per-iteration energy/AUROC lines",
    )
    w.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
