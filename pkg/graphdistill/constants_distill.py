import click

# GCN teacher defaults (2 layers, 64 hidden, dropout 0.5, lr 0.01, wd 5e-4)
DEFAULT_TEACHER_LAYERS = 2
DEFAULT_TEACHER_HIDDEN = 64
DEFAULT_TEACHER_DROPOUT = 0.5
DEFAULT_TEACHER_LR = 0.01
DEFAULT_TEACHER_WEIGHT_DECAY = 5e-4
DEFAULT_TEACHER_MAX_EPOCHS = 500
DEFAULT_TEACHER_PATIENCE = 50

# Student / distillation defaults
DEFAULT_LAMBDA = 0.5
DEFAULT_LAMBDA_NA = 0.5
DEFAULT_BETA = 3.0
DEFAULT_TAU = 1.0
DEFAULT_RHO = 0.1
DEFAULT_K = 2
DEFAULT_STUDENT_DROPOUT = 0.5
DEFAULT_STUDENT_LR = 0.01
DEFAULT_STUDENT_WEIGHT_DECAY = 5e-4
DEFAULT_MAX_EPOCHS = 500
DEFAULT_PATIENCE = 50
DEFAULT_LOG_EVERY = 50

# Numeric floors of the boosting cascade
EPS_ALPHA = 1e-8
EPS_ERROR = 1e-3

# Adam
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8

ACTIVATION = "relu"
INIT_SCHEME = "glorot_uniform"

# Named random streams; the integer is the SeedSequence spawn key
SEED_STREAMS = {
    "split": 0,
    "init": 1,
    "dropout": 2,
    "mask": 3,
    "rc": 4,
    "bootstrap": 5,
    "sbm": 6,
    "eval_mask": 7,
    "gradcheck": 8,
    "na_dropout": 9,
}

# Distillation methods understood by the trainer
METHOD_ADAGMLP = "adagmlp"
METHOD_GLNN = "glnn"
METHOD_BAGGING = "bagging"
DISTILL_METHODS = (METHOD_ADAGMLP, METHOD_GLNN, METHOD_BAGGING)

# Ensemble combiners
COMBINER_ADABOOST = "adaboost"
COMBINER_AVERAGE = "average"
COMBINER_VOTE = "vote"
COMBINERS = (COMBINER_ADABOOST, COMBINER_AVERAGE, COMBINER_VOTE)


# Cribbed from https://click.palletsprojects.com/en/7.x/parameters/
class IntervalFloatParamType(click.ParamType):
    """A float restricted to an interval, with the interval in the message"""

    name = "float"

    def __init__(self, symbol, low, high, low_open=True, high_open=True):
        self.symbol = symbol
        self.low = low
        self.high = high
        self.low_open = low_open
        self.high_open = high_open

    @property
    def interval(self):
        left = "(" if self.low_open else "["
        right = ")" if self.high_open else "]"
        high = "∞" if self.high is None else f"{self.high:g}"
        return f"{self.symbol} ∈ {left}{self.low:g},{high}{right}"

    def contains(self, value):
        above = value > self.low if self.low_open else value >= self.low
        if self.high is None:
            return above
        below = value < self.high if self.high_open else value <= self.high
        return above and below

    def convert(self, value, param, ctx):
        try:
            value = float(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is not a number; expected {self.interval}", param, ctx)
        if not self.contains(value):
            self.fail(f"{value:g} is out of range; expected {self.interval}", param, ctx)
        return value


TAU = IntervalFloatParamType("τ", 0, 1, low_open=True, high_open=False)
BETA = IntervalFloatParamType("β", 0, None, low_open=True)
RHO = IntervalFloatParamType("ρ", 0, 1, low_open=False, high_open=True)
# Boundaries are accepted here and rejected later unless sweep mode is on
LAMBDA = IntervalFloatParamType("λ", 0, 1, low_open=False, high_open=False)
PROBABILITY = IntervalFloatParamType("p", 0, 1, low_open=False, high_open=True)
