"""
train_teacher.py

Command line entry for fitting the GCN teacher on a dataset
"""
import click

from graphdistill import trainer
from graphdistill.checkpoint import save_checkpoint
from graphdistill.config import TeacherConfig, load_config
from graphdistill.create_save_summary import write_json
from graphdistill.datasets import dataset_options, prepare_dataset
from graphdistill.errors import exit_on_error
from graphdistill.log_utils import get_logger

logger = get_logger(__file__)


class TrainTeacher:
    def __init__(self, args):
        self.args = args
        for key in args:
            setattr(self, key, args[key])
        # Validate the config before any data is loaded or generated
        self.config = load_config(
            TeacherConfig,
            self.config_path,
            section="teacher",
            max_epochs=self.epochs,
            seed=self.seed,
            layers=self.layers,
            hidden=self.hidden,
            lr=self.lr,
            patience=self.patience,
        )
        self.dataset = prepare_dataset(
            self.dataset,
            seed=self.config.seed,
            split_mode=self.split_mode,
            label_rate=self.label_rate,
            unseen_fraction=self.unseen_fraction,
            per_class_train=self.per_class_train,
            val_size=self.val_size,
            test_size=self.test_size,
            n_classes=self.n_classes,
        )

    def train(self):
        self.checkpoint, self.report = trainer.train_teacher(self.dataset, self.config)
        self.checkpoint.metadata["dataset"] = self.dataset.name
        return self.report

    def maybe_write_checkpoint(self):
        if self.out:
            save_checkpoint(self.checkpoint, self.out)

    def maybe_write_report(self):
        if self.report_path:
            write_json(self.report.to_dict(), self.report_path, "teacher report")

    def echo_metrics(self):
        click.echo(
            f"teacher\tval_acc={self.report.val_acc:.4f}\t"
            f"test_acc={self.report.test_acc:.4f}\tepochs={self.report.epochs}"
        )


@click.command()
@dataset_options
@click.option(
    "--out", default="teacher.gdck", help="Where to write the teacher checkpoint"
)
@click.option("--report", "report_path", default=None, help="JSON training report")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of teacher settings, flat or under a 'teacher' key",
)
@click.option("--epochs", type=int, default=None, help="Maximum training epochs")
@click.option("--layers", type=int, default=None)
@click.option("--hidden", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--seed", type=int, default=None)
@exit_on_error
def cli(
    dataset,
    split_mode,
    label_rate,
    unseen_fraction,
    per_class_train,
    val_size,
    test_size,
    n_classes,
    out,
    report_path,
    config_path,
    epochs,
    layers,
    hidden,
    lr,
    patience,
    seed,
):
    """Train a GCN teacher on DATASET (a directory or preset:<name>)

    \b
    Parameters
    ----------
    dataset : str
        Dataset directory holding graph.txt, features, labels.csv and
        optionally split.json, or "preset:test" / "preset:latency"
    out : str
        Teacher checkpoint path
    report_path : str
        If given, write the training report as JSON here
    epochs : int
        Maximum number of epochs; 0 saves the initial parameters
    """
    # \b above prevents re-wrapping of paragraphs
    train_obj = TrainTeacher(locals())
    train_obj.train()
    train_obj.maybe_write_checkpoint()
    train_obj.maybe_write_report()
    train_obj.echo_metrics()


if __name__ == "__main__":
    cli()
