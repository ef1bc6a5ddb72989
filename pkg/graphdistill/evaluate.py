"""
evaluate.py

Command line entry for scoring a teacher or student-ensemble checkpoint,
optionally with test features partially masked
"""
import click

from graphdistill.checkpoint import KIND_TEACHER, load_checkpoint
from graphdistill.constants_distill import COMBINERS, PROBABILITY
from graphdistill.create_save_summary import write_json
from graphdistill.datasets import dataset_options, prepare_dataset
from graphdistill.errors import DimensionError, exit_on_error
from graphdistill.log_utils import get_logger
from graphdistill.trainer import evaluate_ensemble, evaluate_teacher, make_view

logger = get_logger(__file__)


def model_dims(checkpoint):
    """(feature dim, class count) a checkpoint was trained for"""
    if checkpoint.kind == KIND_TEACHER:
        widths = checkpoint.teacher.widths
    else:
        widths = checkpoint.ensemble.students[0].widths
    return widths[0], widths[-1]


def check_dims(checkpoint, dataset):
    feature_dim, n_classes = model_dims(checkpoint)
    if feature_dim != dataset.feature_dim or n_classes != dataset.n_classes:
        raise DimensionError(
            f"checkpoint maps {feature_dim} features to {n_classes} classes, "
            f"dataset has {dataset.feature_dim} features and {dataset.n_classes} classes"
        )


class Evaluate:
    def __init__(self, args):
        self.args = args
        for key in args:
            setattr(self, key, args[key])
        self.checkpoint = load_checkpoint(self.checkpoint_path)
        if self.seed is None:
            self.seed = int((self.checkpoint.config or {}).get("seed", 0))
        self.dataset = prepare_dataset(
            self.dataset,
            seed=self.seed,
            split_mode=self.split_mode,
            label_rate=self.label_rate,
            unseen_fraction=self.unseen_fraction,
            per_class_train=self.per_class_train,
            val_size=self.val_size,
            test_size=self.test_size,
            n_classes=self.n_classes,
        )
        check_dims(self.checkpoint, self.dataset)

    def evaluate(self):
        view = make_view(self.dataset)
        if self.checkpoint.kind == KIND_TEACHER:
            metrics = evaluate_teacher(view, self.checkpoint, self.missing_rate, self.seed)
            model = "teacher"
        else:
            combiner = self.combiner or self.checkpoint.ensemble.combiner
            metrics = evaluate_ensemble(
                view,
                self.checkpoint,
                combiner,
                self.missing_rate,
                self.seed,
                self.n_jobs,
            )
            model = f"{self.checkpoint.method}:{combiner}"
        self.metrics = dict(model=model, missing_rate=self.missing_rate, **metrics)
        return self.metrics

    def echo_metrics(self):
        click.echo(
            "\t".join(
                [self.metrics["model"]]
                + [
                    f"{key}={self.metrics[key]:.4f}"
                    for key in ("missing_rate", "val_acc", "test_acc", "infer_ms")
                ]
            )
        )

    def maybe_write_json(self):
        if self.json_path:
            write_json(self.metrics, self.json_path, "evaluation metrics")


@click.command(name="eval")
@click.argument("checkpoint_path", type=click.Path(exists=True, dir_okay=False))
@dataset_options
@click.option(
    "--missing-rate",
    type=PROBABILITY,
    default=0.0,
    help="Fraction of every test node's features zeroed before inference",
)
@click.option(
    "--combiner",
    type=click.Choice(COMBINERS),
    default=None,
    help="Override the ensemble's stored combiner",
)
@click.option("--seed", type=int, default=None, help="Defaults to the checkpoint's seed")
@click.option("--n-jobs", type=int, default=1, help="Threads for student inference")
@click.option("--json", "json_path", default=None, help="Also write metrics as JSON")
@exit_on_error
def cli(
    checkpoint_path,
    dataset,
    split_mode,
    label_rate,
    unseen_fraction,
    per_class_train,
    val_size,
    test_size,
    n_classes,
    missing_rate,
    combiner,
    seed,
    n_jobs,
    json_path,
):
    """Score CHECKPOINT_PATH on DATASET

    Teacher checkpoints are evaluated with the dataset's graph; ensemble
    checkpoints see node features only.
    """
    eval_obj = Evaluate(locals())
    eval_obj.evaluate()
    eval_obj.echo_metrics()
    eval_obj.maybe_write_json()


if __name__ == "__main__":
    cli()
