"""
harness.py

Experiment drivers: classification in both settings, label-rate,
feature-missing, hyper-parameter and ensemble-size sweeps, ablations, the
ensemble-combiner comparison and the inference latency bench. Every driver
returns MetricRows ordered by (grid point, seed, method).
"""
import itertools
import json
import logging
import threading
import time
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse
from joblib import Parallel, delayed
from tqdm import tqdm

from graphdistill.adaboost import ensemble_predict
from graphdistill.config import DistillConfig, TeacherConfig
from graphdistill.constants_distill import (
    COMBINER_ADABOOST,
    COMBINER_AVERAGE,
    COMBINER_VOTE,
)
from graphdistill.constants_harness import (
    ABLATION_DEFAULTS,
    ABLATION_PROTOCOLS,
    ABLATION_RATES,
    ABLATION_VARIANTS,
    CLASSIFICATION_METHODS,
    DEFAULT_METHODS,
    DEFAULT_SEEDS,
    EXPERIMENT_KINDS,
    GRID_KEY_K,
    GRID_KEY_LABEL_RATE,
    GRID_KEY_MISSING_RATE,
    GRID_KEY_SETTING,
    HYPER_GRID_KEYS,
    KIND_ABLATION,
    KIND_ENSEMBLE_COMPARE,
    KIND_FEATURE_MISSING,
    KIND_HYPER,
    KIND_INDUCTIVE,
    KIND_K,
    KIND_LABEL_RATE,
    KIND_LATENCY,
    KIND_TRANSDUCTIVE,
    LATENCY_GRID_KEYS,
    LATENCY_REPEATS,
    LATENCY_WARMUPS,
    METHOD_ADAGMLP,
    METHOD_AVERAGE,
    METHOD_BAGGING,
    METHOD_GLNN,
    METHOD_MLP_ONLY,
    METHOD_TEACHER_ONLY,
    METHOD_VOTE,
    PARALLEL_SUFFIX,
    REPORT_FORMATS,
    SPEC_SCHEMA_POINTER,
    SPLIT_SPEC_KEYS,
    MetricRow,
)
from graphdistill.datasets import missing_train_classes, prepare_dataset
from graphdistill.errors import ConfigError, ContractError, ParseError
from graphdistill.graph import Graph, NormalizedAdjacency
from graphdistill.log_utils import get_logger
from graphdistill.models import ensemble_logits, gcn_forward
from graphdistill.os_utils import get_max_threads
from graphdistill.trainer import (
    distill,
    evaluate_ensemble,
    evaluate_teacher,
    make_view,
    train_teacher,
)

logger = get_logger(__file__)

PlannedRun = namedtuple(
    "PlannedRun", ["experiment", "method", "grid_key", "grid_value", "seed"]
)

# How each report method is trained: (trainer method, config changes, combiner)
METHOD_RECIPES = {
    METHOD_ADAGMLP: (METHOD_ADAGMLP, {}, COMBINER_ADABOOST),
    METHOD_GLNN: (METHOD_GLNN, {"k": 1, "student_seeds": None}, COMBINER_ADABOOST),
    METHOD_BAGGING: (METHOD_BAGGING, {}, COMBINER_AVERAGE),
    # Vote and Average share one ensemble trained without boosting
    METHOD_VOTE: (METHOD_ADAGMLP, {"adakd_enabled": False}, COMBINER_VOTE),
    METHOD_AVERAGE: (METHOD_ADAGMLP, {"adakd_enabled": False}, COMBINER_AVERAGE),
    METHOD_MLP_ONLY: (
        METHOD_GLNN,
        {"k": 1, "student_seeds": None, "lambda_": 1.0, "sweep_mode": True},
        COMBINER_ADABOOST,
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: what to run, on which data, over which grid and seeds

    Parameters
    ----------
    kind : str
        One of ``EXPERIMENT_KINDS``
    dataset : str
        Dataset directory or ``preset:<name>``
    seeds : tuple of int
    methods : tuple of str
        Report methods; ablation specs list variant names instead
    split : dict
        Split options (mode, label_rate, unseen_fraction, per_class_train,
        val_size, test_size, classes)
    teacher, distill : TeacherConfig, DistillConfig
        Base configs; seeds are replaced per run
    grid_key : str
    grid_values : tuple
    ablation : dict
        Rates of the two ablation protocols
    latency : dict
        warmups, repeats and whether to add a parallel-inference row
    output : str
        Row file; the summary is written next to it
    """

    kind: str
    name: str = None
    dataset: str = "preset:test"
    seeds: tuple = DEFAULT_SEEDS
    methods: tuple = None
    split: dict = field(default_factory=dict)
    teacher: TeacherConfig = field(default_factory=TeacherConfig)
    distill: DistillConfig = field(default_factory=DistillConfig)
    grid_key: str = GRID_KEY_SETTING
    grid_values: tuple = ()
    ablation: dict = field(default_factory=dict)
    latency: dict = field(default_factory=dict)
    output: str = None
    format: str = "csv"
    n_jobs: int = 1

    def __post_init__(self):
        if self.name is None:
            object.__setattr__(self, "name", self.kind)
        if self.methods is None:
            object.__setattr__(self, "methods", DEFAULT_METHODS.get(self.kind, ()))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "grid_values", tuple(self.grid_values))
        self.validate()

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.get("kind")
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"unknown experiment kind {kind!r}, choose from "
                f"{list(EXPERIMENT_KINDS)}; {SPEC_SCHEMA_POINTER}"
            )
        known = {
            "kind",
            "name",
            "dataset",
            "seeds",
            "methods",
            "split",
            "teacher",
            "distill",
            "grid",
            "ablation",
            "latency",
            "output",
            "format",
            "n_jobs",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown spec keys {unknown}; {SPEC_SCHEMA_POINTER}")
        grid = data.pop("grid", None) or {}
        kwargs = {key: value for key, value in data.items() if value is not None}
        kwargs["teacher"] = TeacherConfig.from_dict(data.get("teacher"))
        kwargs["distill"] = DistillConfig.from_dict(data.get("distill"))
        kwargs["grid_key"] = grid.get("key", default_grid_key(kind))
        kwargs["grid_values"] = grid.get("values", ())
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as error:
            raise ParseError(error.msg, path, error.lineno)
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a JSON object; {SPEC_SCHEMA_POINTER}")
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "kind": self.kind,
            "name": self.name,
            "dataset": self.dataset,
            "seeds": list(self.seeds),
            "methods": list(self.methods),
            "split": self.split,
            "teacher": self.teacher.to_dict(),
            "distill": self.distill.to_dict(),
            "grid": {"key": self.grid_key, "values": list(self.grid_values)},
            "ablation": self.ablation,
            "latency": self.latency,
            "output": self.output,
            "format": self.format,
            "n_jobs": self.n_jobs,
        }

    def validate(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; {SPEC_SCHEMA_POINTER}")
        if not self.seeds:
            raise ConfigError("an experiment needs at least one seed")
        if self.format not in REPORT_FORMATS:
            raise ConfigError(f"unknown report format {self.format!r}")
        unknown = sorted(set(self.split) - set(SPLIT_SPEC_KEYS))
        if unknown:
            raise ConfigError(f"unknown split keys {unknown}; {SPEC_SCHEMA_POINTER}")
        if self.kind == KIND_ABLATION:
            bad = [m for m in self.methods if m not in ABLATION_VARIANTS]
            if bad:
                raise ConfigError(
                    f"unknown ablation variants {bad}, choose from {list(ABLATION_VARIANTS)}"
                )
            unknown = sorted(set(self.ablation) - set(ABLATION_PROTOCOLS))
            if unknown:
                raise ConfigError(f"unknown ablation protocols {unknown}")
        else:
            bad = [m for m in self.methods if m not in CLASSIFICATION_METHODS]
            if bad:
                raise ConfigError(
                    f"unknown methods {bad}, choose from {list(CLASSIFICATION_METHODS)}"
                )
        self._validate_grid()

    def _validate_grid(self):
        values = self.grid_values
        if self.kind == KIND_LABEL_RATE:
            if any(not 0 < v < 1 for v in values):
                raise ConfigError(f"label rates must lie in (0,1), got {list(values)}")
        elif self.kind == KIND_FEATURE_MISSING:
            if any(not 0 <= v < 1 for v in values):
                raise ConfigError(f"missing rates must lie in [0,1), got {list(values)}")
        elif self.kind == KIND_K:
            if any(int(v) != v or v < 1 for v in values):
                raise ConfigError(f"ensemble sizes must be integers >= 1, got {list(values)}")
        elif self.kind == KIND_HYPER:
            hyper_configs(self.distill, self.grid_key, values)
        elif self.kind == KIND_LATENCY:
            if self.grid_key not in LATENCY_GRID_KEYS:
                raise ConfigError(
                    f"latency grids range over {LATENCY_GRID_KEYS}, got {self.grid_key!r}"
                )
        elif self.kind == KIND_ENSEMBLE_COMPARE and self.distill.k < 2:
            raise ConfigError(f"the ensemble comparison needs K >= 2, got {self.distill.k}")

    def split_kwargs(self, **changes):
        kwargs = {
            "split_mode": self.split.get("mode"),
            "n_classes": self.split.get("classes"),
        }
        for key in ("label_rate", "unseen_fraction", "per_class_train", "val_size", "test_size"):
            if key in self.split:
                kwargs[key] = self.split[key]
        kwargs.update(changes)
        return kwargs


def default_grid_key(kind):
    return {
        KIND_LABEL_RATE: GRID_KEY_LABEL_RATE,
        KIND_FEATURE_MISSING: GRID_KEY_MISSING_RATE,
        KIND_K: GRID_KEY_K,
        KIND_HYPER: "lambda_",
        KIND_LATENCY: "hidden",
    }.get(kind, GRID_KEY_SETTING)


def hyper_configs(base, key, values):
    """One validated sweep-mode config per grid value

    Node Alignment is removed unless λ_NA itself is swept.
    """
    normalized = key.replace("-", "_")
    normalized = "lambda_" if normalized == "lambda" else normalized
    if normalized not in HYPER_GRID_KEYS:
        raise ConfigError(f"cannot sweep {key!r}, choose from {list(HYPER_GRID_KEYS)}")
    cfg = base.replace(sweep_mode=True)
    if normalized != "lambda_na":
        cfg = cfg.ablate(na_enabled=False)
    return [cfg.replace(**{normalized: value}) for value in values]


def uses_feature_masking(method):
    """Only the AdaGMLP trainer reads ρ"""
    recipe = METHOD_RECIPES.get(method)
    return recipe is not None and recipe[0] == METHOD_ADAGMLP


def ablation_method_name(variant):
    return METHOD_ADAGMLP if variant == "full" else METHOD_ADAGMLP + variant


def ablation_grid(spec):
    """(protocol, grid key, rate) of both ablation protocols"""
    rates = dict(ABLATION_RATES)
    rates.update(spec.ablation)
    return [
        ("label_rate", GRID_KEY_LABEL_RATE, rates["label_rate"]),
        ("feature_missing", GRID_KEY_MISSING_RATE, rates["feature_missing"]),
    ]


def latency_methods(spec):
    methods = list(spec.methods)
    if spec.latency.get("parallel", False):
        methods += [m + PARALLEL_SUFFIX for m in spec.methods if m != METHOD_TEACHER_ONLY]
    return methods


def plan_grid(spec):
    """(grid key, grid value) of every grid point, in report order"""
    if spec.kind in (KIND_TRANSDUCTIVE, KIND_INDUCTIVE, KIND_ENSEMBLE_COMPARE):
        setting = KIND_INDUCTIVE if spec.kind == KIND_INDUCTIVE else KIND_TRANSDUCTIVE
        return [(GRID_KEY_SETTING, setting)]
    if spec.kind == KIND_ABLATION:
        return [(grid_key, rate) for _, grid_key, rate in ablation_grid(spec)]
    return [(spec.grid_key, value) for value in spec.grid_values]


def plan_runs(spec):
    """Every (method, grid point, seed) an experiment will produce a row for"""
    if spec.kind == KIND_ABLATION:
        methods = [ablation_method_name(v) for v in spec.methods]
    elif spec.kind == KIND_LATENCY:
        methods = latency_methods(spec)
    else:
        methods = list(spec.methods)
    return [
        PlannedRun(spec.name, method, grid_key, grid_value, seed)
        for (grid_key, grid_value), seed, method in itertools.product(
            plan_grid(spec), spec.seeds, methods
        )
    ]


def _progress(items, desc):
    return tqdm(items, desc=desc, leave=False, disable=not logger.isEnabledFor(logging.DEBUG))


def fan_out(tasks, n_jobs=1, desc="runs"):
    """Run ``tasks`` on up to ``n_jobs`` threads and merge their rows in key order

    Every task returns a list of (sort key, MetricRow) pairs.
    """
    n_jobs = min(get_max_threads(n_jobs), max(len(tasks), 1))
    if n_jobs == 1:
        results = [task() for task in _progress(tasks, desc)]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(task)() for task in tasks
        )
    keyed = [pair for result in results for pair in result]
    keyed.sort(key=lambda pair: pair[0])
    return [row for _, row in keyed]


class SeedRun:
    """One seed's data split, teacher and trained students

    Trained models are cached by (method, config) so paired methods share
    the teacher and split, and Vote/Average share one ensemble.
    """

    def __init__(self, spec, seed, **split_changes):
        self.spec = spec
        self.seed = seed
        self.dataset = prepare_dataset(
            spec.dataset, seed=seed, **spec.split_kwargs(**split_changes)
        )
        self.view = make_view(self.dataset)
        self._teacher = None
        self._trained = {}
        self._lock = threading.Lock()

    @property
    def teacher(self):
        """(TeacherCheckpoint, TrainReport), trained on first use"""
        with self._lock:
            if self._teacher is None:
                config = self.spec.teacher.replace(seed=self.seed)
                self._teacher = train_teacher(self.view, config)
            return self._teacher

    def base_config(self, **changes):
        cfg = self.spec.distill.replace(seed=self.seed)
        return cfg.replace(**changes) if changes else cfg

    def train(self, method, cfg):
        """Checkpoint, report and combiner of a report method under ``cfg``"""
        trainer_method, changes, combiner = METHOD_RECIPES[method]
        flags = {key: changes[key] for key in changes if key.endswith("_enabled")}
        others = {key: value for key, value in changes.items() if key not in flags}
        if others:
            cfg = cfg.replace(**others)
        if flags:
            cfg = cfg.ablate(**flags)
        key = (trainer_method, json.dumps(cfg.to_dict(), sort_keys=True))
        with self._lock:
            cached = self._trained.get(key)
        if cached is None:
            teacher, _ = self.teacher
            logger.info(f"{self.spec.name}: training {method} for seed {self.seed}")
            cached = distill(self.view, teacher, cfg, trainer_method)
            with self._lock:
                self._trained[key] = cached
        checkpoint, report = cached
        return checkpoint, report, combiner

    def row(self, method, grid_key, grid_value, cfg=None, missing_rate=0.0, extra=None):
        """Train (or reuse) ``method`` and score it on the test nodes"""
        if method == METHOD_TEACHER_ONLY:
            checkpoint, report = self.teacher
            metrics = evaluate_teacher(self.view, checkpoint, missing_rate, self.seed)
        else:
            checkpoint, report, combiner = self.train(method, cfg or self.base_config())
            metrics = evaluate_ensemble(
                self.view, checkpoint, combiner, missing_rate, self.seed
            )
        return MetricRow(
            experiment=self.spec.name,
            method=method,
            grid_key=grid_key,
            grid_value=grid_value,
            seed=self.seed,
            test_acc=metrics["test_acc"],
            val_acc=metrics["val_acc"],
            train_ms=report.train_ms,
            infer_ms=metrics["infer_ms"],
            extra=extra,
        )


def _keyed(grid_index, seed_index, rows):
    return [((grid_index, seed_index, method_index), row) for method_index, row in enumerate(rows)]


def run_classification(spec):
    """Teacher once per seed, then every requested method on the same split"""
    setting = KIND_INDUCTIVE if spec.kind == KIND_INDUCTIVE else KIND_TRANSDUCTIVE
    changes = {"split_mode": "inductive"} if setting == KIND_INDUCTIVE else {}

    def task(seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed, **changes)
            rows = [seed_run.row(m, GRID_KEY_SETTING, setting) for m in spec.methods]
            return _keyed(0, seed_index, rows)

        return run

    return fan_out([task(i, s) for i, s in enumerate(spec.seeds)], spec.n_jobs, spec.name)


def sweep_label_rate(spec, rates=None):
    """Fresh label-rate split, teacher and students per (rate, seed)"""
    rates = spec.grid_values if rates is None else rates

    def task(grid_index, rate, seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed, split_mode="label-rate", label_rate=rate)
            missing = missing_train_classes(
                seed_run.dataset.labels, seed_run.dataset.split, seed_run.dataset.n_classes
            )
            extra = {"all_classes_present": not missing, "missing_classes": missing}
            rows = [
                seed_run.row(m, GRID_KEY_LABEL_RATE, rate, extra=extra) for m in spec.methods
            ]
            return _keyed(grid_index, seed_index, rows)

        return run

    tasks = [
        task(g, rate, i, seed)
        for g, rate in enumerate(rates)
        for i, seed in enumerate(spec.seeds)
    ]
    return fan_out(tasks, spec.n_jobs, spec.name)


def sweep_feature_missing(spec, missing_rates=None):
    """Test features masked at each rate; training data stays complete

    AdaGMLP trains with ρ equal to the missing rate; a 0 rate keeps the base ρ.
    """
    rates = spec.grid_values if missing_rates is None else missing_rates

    def task(seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed)
            keyed = []
            base = seed_run.base_config()
            for grid_index, rate in enumerate(rates):
                masked = base.replace(rho=rate) if rate > 0 else base
                rows = [
                    seed_run.row(
                        m,
                        GRID_KEY_MISSING_RATE,
                        rate,
                        masked if uses_feature_masking(m) else base,
                        missing_rate=rate,
                    )
                    for m in spec.methods
                ]
                keyed += _keyed(grid_index, seed_index, rows)
            return keyed

        return run

    if not rates:
        return []
    return fan_out([task(i, s) for i, s in enumerate(spec.seeds)], spec.n_jobs, spec.name)


def sweep_hyper(spec, grid=None):
    """One distillation per grid value per seed, in sweep mode"""
    values = spec.grid_values if grid is None else grid
    configs = hyper_configs(spec.distill, spec.grid_key, values)

    def task(seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed)
            keyed = []
            for grid_index, (value, cfg) in enumerate(zip(values, configs)):
                cfg = cfg.replace(seed=seed)
                rows = [seed_run.row(m, spec.grid_key, value, cfg) for m in spec.methods]
                keyed += _keyed(grid_index, seed_index, rows)
            return keyed

        return run

    if not values:
        return []
    return fan_out([task(i, s) for i, s in enumerate(spec.seeds)], spec.n_jobs, spec.name)


def sweep_k(spec, k_values=None):
    """One run per ensemble size per seed"""
    values = spec.grid_values if k_values is None else k_values

    def task(seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed)
            keyed = []
            for grid_index, k in enumerate(values):
                cfg = seed_run.base_config(k=int(k), student_seeds=None)
                rows = [seed_run.row(m, GRID_KEY_K, int(k), cfg) for m in spec.methods]
                keyed += _keyed(grid_index, seed_index, rows)
            return keyed

        return run

    if not values:
        return []
    return fan_out([task(i, s) for i, s in enumerate(spec.seeds)], spec.n_jobs, spec.name)


def run_ablation(spec):
    """Every variant under the label-rate and the feature-missing protocol"""
    variants = list(spec.methods)
    protocols = ablation_grid(spec)

    def task(grid_index, protocol, grid_key, rate, seed_index, seed):
        def run():
            if protocol == "label_rate":
                seed_run = SeedRun(spec, seed, split_mode="label-rate", label_rate=rate)
                base = seed_run.base_config(**ABLATION_DEFAULTS)
                missing_rate = 0.0
            else:
                seed_run = SeedRun(spec, seed)
                base = seed_run.base_config(**ABLATION_DEFAULTS, rho=rate)
                missing_rate = rate
            rows = []
            for variant in variants:
                cfg = base.ablate(**ABLATION_VARIANTS[variant])
                row = seed_run.row(METHOD_ADAGMLP, grid_key, rate, cfg, missing_rate)
                rows.append(
                    row._replace(method=ablation_method_name(variant), extra={"variant": variant})
                )
            return _keyed(grid_index, seed_index, rows)

        return run

    tasks = [
        task(g, protocol, grid_key, rate, i, seed)
        for g, (protocol, grid_key, rate) in enumerate(protocols)
        for i, seed in enumerate(spec.seeds)
    ]
    return fan_out(tasks, spec.n_jobs, spec.name)


def run_ensemble_compare(spec):
    """AdaBoost against Average, Vote, Bagging and a single student, same seeds"""
    if spec.distill.k < 2:
        raise ConfigError(f"the ensemble comparison needs K >= 2, got {spec.distill.k}")
    return run_classification(spec)


def time_inference(predict, warmups=LATENCY_WARMUPS, repeats=LATENCY_REPEATS):
    """Median wall-clock milliseconds of ``predict()`` after warm-up calls"""
    if repeats < 1:
        raise ConfigError(f"need at least one timed repetition, got {repeats}")
    for _ in range(warmups):
        predict()
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        predict()
        timings.append((time.perf_counter() - start) * 1000)
    return float(np.median(timings))


def graph_references(obj, _seen=None):
    """Graph structures reachable from ``obj`` through attributes and containers"""
    seen = set() if _seen is None else _seen
    if id(obj) in seen:
        return []
    seen.add(id(obj))
    if isinstance(obj, (Graph, NormalizedAdjacency)) or scipy.sparse.issparse(obj):
        return [obj]
    if isinstance(obj, (str, bytes, int, float, bool, np.ndarray, np.generic)) or obj is None:
        return []
    if isinstance(obj, dict):
        children = list(obj.values())
    elif isinstance(obj, (list, tuple, set, frozenset)):
        children = list(obj)
    elif hasattr(obj, "__dict__"):
        children = list(vars(obj).values())
    elif hasattr(obj, "__slots__"):
        children = [getattr(obj, name, None) for name in obj.__slots__]
    else:
        return []
    found = []
    for child in children:
        found += graph_references(child, seen)
    return found


def assert_graph_free(ensemble):
    """Students must predict from features alone"""
    found = graph_references(ensemble)
    if found:
        raise ContractError(
            f"student ensemble holds {len(found)} graph structure(s): "
            f"{sorted({type(g).__name__ for g in found})}"
        )


def bench_latency(spec, widths=None):
    """Median inference time of the teacher and of the student ensembles

    The batch is every test node. Teacher timings include the sparse
    propagation; student timings run on test features only, single-threaded
    unless the spec asks for an extra parallel row.
    """
    values = spec.grid_values if widths is None else widths
    warmups = spec.latency.get("warmups", LATENCY_WARMUPS)
    repeats = spec.latency.get("repeats", LATENCY_REPEATS)
    methods = latency_methods(spec)

    def teacher_row(seed_run, value):
        checkpoint, report = seed_run.teacher
        view = seed_run.view
        teacher = checkpoint.teacher

        def predict():
            logits = gcn_forward(view.eval_adjacency, view.eval_features, teacher, False)
            return np.argmax(logits.data[view.test_idx], axis=1)

        row = seed_run.row(METHOD_TEACHER_ONLY, spec.grid_key, value)
        return row._replace(infer_ms=time_inference(predict, warmups, repeats))

    def student_row(seed_run, method, value):
        parallel = method.endswith(PARALLEL_SUFFIX)
        base_method = method[: -len(PARALLEL_SUFFIX)] if parallel else method
        changes = {spec.grid_key: int(value)}
        if spec.grid_key == GRID_KEY_K:
            changes["student_seeds"] = None
        cfg = seed_run.base_config(**changes)
        checkpoint, _, combiner = seed_run.train(base_method, cfg)
        ensemble = checkpoint.ensemble
        assert_graph_free(ensemble)
        view = seed_run.view
        test_features = view.eval_features.data[view.test_idx]
        n_jobs = get_max_threads(None) if parallel else 1

        def predict():
            logits = ensemble_logits(ensemble, test_features, n_jobs)
            return ensemble_predict(logits, ensemble.alpha_bar, combiner)

        row = seed_run.row(base_method, spec.grid_key, value, cfg)
        return row._replace(
            method=method,
            infer_ms=time_inference(predict, warmups, repeats),
            extra={"k": ensemble.k, "hidden": ensemble.students[0].widths[1], "n_jobs": n_jobs},
        )

    def task(seed_index, seed):
        def run():
            seed_run = SeedRun(spec, seed)
            keyed = []
            for grid_index, value in enumerate(values):
                rows = [
                    teacher_row(seed_run, value)
                    if method == METHOD_TEACHER_ONLY
                    else student_row(seed_run, method, value)
                    for method in methods
                ]
                keyed += _keyed(grid_index, seed_index, rows)
            return keyed

        return run

    if not values:
        return []
    # Timings are taken one run at a time
    return fan_out([task(i, s) for i, s in enumerate(spec.seeds)], 1, spec.name)


DRIVERS = {
    KIND_TRANSDUCTIVE: run_classification,
    KIND_INDUCTIVE: run_classification,
    KIND_LABEL_RATE: sweep_label_rate,
    KIND_FEATURE_MISSING: sweep_feature_missing,
    KIND_HYPER: sweep_hyper,
    KIND_K: sweep_k,
    KIND_ABLATION: run_ablation,
    KIND_ENSEMBLE_COMPARE: run_ensemble_compare,
    KIND_LATENCY: bench_latency,
}


def run_experiment(spec):
    """Dispatch ``spec`` to its driver and return the MetricRows"""
    if isinstance(spec, dict):
        spec = ExperimentSpec.from_dict(spec)
    logger.info(
        f"Running {spec.name} ({spec.kind}) on {spec.dataset} with {len(spec.seeds)} seeds"
    )
    rows = DRIVERS[spec.kind](spec)
    logger.info(f"{spec.name} produced {len(rows)} rows")
    return rows


def with_output(spec, output):
    return replace(spec, output=output)
