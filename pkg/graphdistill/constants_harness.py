from collections import namedtuple

# Experiment kinds understood by the harness
KIND_TRANSDUCTIVE = "transductive"
KIND_INDUCTIVE = "inductive"
KIND_LABEL_RATE = "label_rate_sweep"
KIND_FEATURE_MISSING = "feature_missing_sweep"
KIND_HYPER = "hyper_sweep"
KIND_K = "k_sweep"
KIND_ABLATION = "ablation"
KIND_ENSEMBLE_COMPARE = "ensemble_compare"
KIND_LATENCY = "latency_bench"
EXPERIMENT_KINDS = (
    KIND_TRANSDUCTIVE,
    KIND_INDUCTIVE,
    KIND_LABEL_RATE,
    KIND_FEATURE_MISSING,
    KIND_HYPER,
    KIND_K,
    KIND_ABLATION,
    KIND_ENSEMBLE_COMPARE,
    KIND_LATENCY,
)

# Method names as they appear in report rows
METHOD_ADAGMLP = "adagmlp"
METHOD_GLNN = "glnn"
METHOD_BAGGING = "bagging"
METHOD_VOTE = "vote"
METHOD_AVERAGE = "average"
METHOD_MLP_ONLY = "mlp_only"
METHOD_TEACHER_ONLY = "teacher_only"
CLASSIFICATION_METHODS = (
    METHOD_ADAGMLP,
    METHOD_GLNN,
    METHOD_BAGGING,
    METHOD_VOTE,
    METHOD_AVERAGE,
    METHOD_MLP_ONLY,
    METHOD_TEACHER_ONLY,
)
# Methods compared in the ensemble study, in report order
ENSEMBLE_COMPARE_METHODS = (
    METHOD_ADAGMLP,
    METHOD_AVERAGE,
    METHOD_VOTE,
    METHOD_BAGGING,
    METHOD_GLNN,
)

# Ablation variants and the config flags each one switches off
ABLATION_VARIANTS = {
    "full": {},
    "-RC": {"rc_enabled": False},
    "-AdaKD": {"adakd_enabled": False},
    "-NA-O": {"na_o_enabled": False},
    "-NA-H": {"na_h_enabled": False},
    "-NA": {"na_enabled": False, "na_o_enabled": False, "na_h_enabled": False},
}
ABLATION_PROTOCOLS = ("label_rate", "feature_missing")

# Keys a hyper-parameter sweep may range over
HYPER_GRID_KEYS = ("lambda_", "lambda_na", "beta", "hidden", "layers", "tau", "rho")

# Search spaces used for hyper-parameter tuning
SEARCH_SPACES = {
    "hidden": [128, 256, 512, 1024, 2048],
    "layers": [2, 3],
    "k": [2, 3, 4],
    "lambda_": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "lambda_na": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "beta": [0.5, 1.0, 2.0, 3.0, 4.0],
}

# Report layout
REPORT_COLUMNS = [
    "experiment",
    "method",
    "grid_key",
    "grid_value",
    "seed",
    "test_acc",
    "val_acc",
    "train_ms",
    "infer_ms",
]
SUMMARY_GROUP_COLUMNS = ["experiment", "method", "grid_key", "grid_value"]
SUMMARY_METRICS = ["test_acc", "val_acc", "train_ms", "infer_ms"]
# Population standard deviation (ddof=0) is used in every summary
SUMMARY_DDOF = 0
REPORT_FORMATS = ("csv", "jsonl")

MetricRow = namedtuple(
    "MetricRow",
    REPORT_COLUMNS + ["extra"],
    defaults=[None],
)

# Synthetic dataset presets
SBM_PRESETS = {
    "test": dict(
        classes=4,
        nodes_per_class=50,
        p_in=0.1,
        p_out=0.01,
        feature_dim=16,
        feature_noise=0.5,
    ),
    "latency": dict(
        classes=10,
        nodes_per_class=2000,
        p_in=0.0025,
        p_out=0.0003,
        feature_dim=500,
        feature_noise=1.0,
    ),
}
# Split conventions of each preset
PRESET_SPLITS = {
    "test": dict(per_class_train=10, val_size=40, test_size=None),
    "latency": dict(per_class_train=20, val_size=500, test_size=1000),
}

# Planetoid-style defaults
DEFAULT_PER_CLASS_TRAIN = 20
DEFAULT_VAL_SIZE = 500
DEFAULT_TEST_SIZE = 1000
DEFAULT_UNSEEN_FRACTION = 0.2

# Latency bench
LATENCY_WARMUPS = 5
LATENCY_REPEATS = 30

# File names inside a dataset directory
GRAPH_FILENAME = "graph.txt"
FEATURES_FILENAME = "features.gdfm"
FEATURES_CSV_FILENAME = "features.csv"
LABELS_FILENAME = "labels.csv"
SPLIT_FILENAME = "split.json"

# Binary formats
FEATURES_MAGIC = b"GDFM"
FEATURES_VERSION = 1
CHECKPOINT_MAGIC = b"GDCK"
CHECKPOINT_VERSION = 1

# Grid key of experiments without a swept value
GRID_KEY_SETTING = "setting"
# Grid keys of the sweeps with a fixed swept quantity
GRID_KEY_LABEL_RATE = "label_rate"
GRID_KEY_MISSING_RATE = "missing_rate"
GRID_KEY_K = "k"
GRID_KEY_VARIANT = "variant"
LATENCY_GRID_KEYS = ("hidden", "k")

# Methods each experiment kind runs when a spec names none
DEFAULT_METHODS = {
    KIND_TRANSDUCTIVE: (METHOD_TEACHER_ONLY, METHOD_MLP_ONLY, METHOD_GLNN, METHOD_ADAGMLP),
    KIND_INDUCTIVE: (METHOD_TEACHER_ONLY, METHOD_MLP_ONLY, METHOD_GLNN, METHOD_ADAGMLP),
    KIND_LABEL_RATE: (METHOD_GLNN, METHOD_ADAGMLP),
    KIND_FEATURE_MISSING: (METHOD_TEACHER_ONLY, METHOD_GLNN, METHOD_ADAGMLP),
    KIND_HYPER: (METHOD_ADAGMLP,),
    KIND_K: (METHOD_ADAGMLP,),
    KIND_ABLATION: tuple(ABLATION_VARIANTS),
    KIND_ENSEMBLE_COMPARE: ENSEMBLE_COMPARE_METHODS,
    KIND_LATENCY: (METHOD_TEACHER_ONLY, METHOD_ADAGMLP),
}
# Hyper-parameters every ablation variant starts from
ABLATION_DEFAULTS = dict(lambda_=0.5, lambda_na=0.5, k=2, beta=3.0)
# Rate used by each ablation protocol when a spec gives none
ABLATION_RATES = {"label_rate": 0.01, "feature_missing": 0.5}
PARALLEL_SUFFIX = "-parallel"

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
SPEC_SCHEMA_POINTER = "see docs/usage.md, section 'Experiment spec files'"
SPLIT_SPEC_KEYS = (
    "mode",
    "label_rate",
    "unseen_fraction",
    "per_class_train",
    "val_size",
    "test_size",
    "classes",
)
