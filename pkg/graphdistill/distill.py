"""
distill.py

Command line entry for distilling a trained teacher into MLP students
"""
import click

from graphdistill import trainer
from graphdistill.checkpoint import KIND_TEACHER, load_checkpoint, save_checkpoint
from graphdistill.config import DistillConfig, load_config
from graphdistill.constants_distill import (
    BETA,
    DISTILL_METHODS,
    LAMBDA,
    METHOD_ADAGMLP,
    METHOD_GLNN,
    PROBABILITY,
    RHO,
    TAU,
)
from graphdistill.create_save_summary import write_json
from graphdistill.datasets import dataset_options, prepare_dataset
from graphdistill.errors import ConfigError, exit_on_error
from graphdistill.log_utils import get_logger

logger = get_logger(__file__)

# Flags that only ever switch a DistillConfig boolean to a fixed value
SWITCH_FLAGS = {
    "no_rc": ("rc_enabled", False),
    "no_adakd": ("adakd_enabled", False),
    "no_na_o": ("na_o_enabled", False),
    "no_na_h": ("na_h_enabled", False),
    "no_na": ("na_enabled", False),
    "sweep_mode": ("sweep_mode", True),
    "share_na_dropout": ("share_na_dropout", True),
    "resample_rc": ("resample_rc_each_epoch", True),
    "carry_node_weights": ("carry_node_weights", True),
}
ABLATION_KEYS = ("rc_enabled", "adakd_enabled", "na_o_enabled", "na_h_enabled", "na_enabled")


def make_distill_config(config_path=None, switches=None, **overrides):
    """DistillConfig from a file, flag values and on/off switches

    Ablation switches go through ``DistillConfig.ablate`` so the NA flags stay
    consistent; the other switches are plain overrides.
    """
    switches = switches or {}
    ablations = {}
    for flag, (key, value) in SWITCH_FLAGS.items():
        if not switches.get(flag):
            continue
        if key in ABLATION_KEYS:
            ablations[key] = value
        else:
            overrides[key] = value
    # Sweep mode must be known before λ boundaries are validated
    config = load_config(DistillConfig, config_path, section="distill", **overrides)
    if ablations:
        config = config.ablate(**ablations)
    return config


class Distill:
    def __init__(self, args):
        self.args = args
        for key in args:
            setattr(self, key, args[key])
        self.config = make_distill_config(
            self.config_path,
            switches={flag: self.args[flag] for flag in SWITCH_FLAGS},
            k=self.k,
            beta=self.beta,
            tau=self.tau,
            lambda_=self.lambda_,
            lambda_na=self.lambda_na,
            rho=self.rho,
            layers=self.layers,
            hidden=self.hidden,
            dropout=self.dropout,
            lr=self.lr,
            weight_decay=self.weight_decay,
            max_epochs=self.epochs,
            patience=self.patience,
            seed=self.seed,
        )
        if self.method == METHOD_GLNN and self.config.k != 1:
            seeds = self.config.student_seeds
            self.config = self.config.replace(
                k=1, student_seeds=seeds[:1] if seeds is not None else None
            )
        self.teacher = load_checkpoint(self.teacher_path)
        if self.teacher.kind != KIND_TEACHER:
            raise ConfigError(f"{self.teacher_path} is not a teacher checkpoint")
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

    def distill(self):
        self.checkpoint, self.report = trainer.distill(
            self.dataset, self.teacher, self.config, self.method
        )
        self.checkpoint.metadata["dataset"] = self.dataset.name
        return self.report

    def maybe_write_checkpoint(self):
        if self.out:
            save_checkpoint(self.checkpoint, self.out)

    def maybe_write_report(self):
        if self.report_path:
            write_json(self.report.to_dict(), self.report_path, f"{self.method} report")

    def echo_metrics(self):
        alphas = ", ".join(f"{a:.4f}" for a in self.checkpoint.ensemble.alpha_bar)
        click.echo(
            f"{self.method}\tval_acc={self.report.val_acc:.4f}\t"
            f"test_acc={self.report.test_acc:.4f}\tepochs={self.report.epochs}\t"
            f"alpha_bar=[{alphas}]"
        )


@click.command()
@dataset_options
@click.option(
    "--teacher",
    "teacher_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Teacher checkpoint written by train-teacher",
)
@click.option("--method", type=click.Choice(DISTILL_METHODS), default=METHOD_ADAGMLP)
@click.option("--out", default="students.gdck", help="Ensemble checkpoint path")
@click.option("--report", "report_path", default=None, help="JSON training report")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of distillation settings, flat or under a 'distill' key",
)
@click.option("-K", "--k", "k", type=int, default=None, help="Number of students")
@click.option("--beta", type=BETA, default=None, help="Boosting sharpness β")
@click.option("--tau", type=TAU, default=None, help="Distillation temperature τ")
@click.option("--lambda", "lambda_", type=LAMBDA, default=None, help="CE weight λ")
@click.option("--lambda-na", type=LAMBDA, default=None, help="NA-O weight λ_NA")
@click.option("--rho", type=RHO, default=None, help="Feature mask ratio ρ")
@click.option("--layers", type=int, default=None, help="Student depth L")
@click.option("--hidden", type=int, default=None, help="Student hidden width")
@click.option("--dropout", type=PROBABILITY, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--weight-decay", type=float, default=None)
@click.option("--epochs", type=int, default=None, help="Maximum training epochs")
@click.option("--patience", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--no-rc", is_flag=True, help="Pooled CE instead of Random Classification")
@click.option("--no-adakd", is_flag=True, help="Uniform node weights in the KD term")
@click.option("--no-na", is_flag=True, help="Drop Node Alignment entirely")
@click.option("--no-na-o", is_flag=True, help="Drop the output alignment term")
@click.option("--no-na-h", is_flag=True, help="Drop the hidden alignment term")
@click.option("--sweep-mode", is_flag=True, help="Allow λ and λ_NA at 0 or 1")
@click.option(
    "--share-na-dropout",
    is_flag=True,
    help="Clean and masked NA forwards share one dropout sample",
)
@click.option("--resample-rc", is_flag=True, help="Redraw the RC partition each epoch")
@click.option(
    "--carry-node-weights",
    is_flag=True,
    help="Keep boosting node weights across epochs",
)
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
    teacher_path,
    method,
    out,
    report_path,
    config_path,
    k,
    beta,
    tau,
    lambda_,
    lambda_na,
    rho,
    layers,
    hidden,
    dropout,
    lr,
    weight_decay,
    epochs,
    patience,
    seed,
    no_rc,
    no_adakd,
    no_na,
    no_na_o,
    no_na_h,
    sweep_mode,
    share_na_dropout,
    resample_rc,
    carry_node_weights,
):
    """Distill a teacher checkpoint into MLP students on DATASET

    \b
    Parameters
    ----------
    dataset : str
        Dataset directory or "preset:<name>"; must be the data the teacher
        was trained on
    method : str
        "adagmlp" (K boosted students), "glnn" (one student) or "bagging"
        (K students on bootstrap samples)
    out : str
        Ensemble checkpoint path
    """
    # \b above prevents re-wrapping of paragraphs
    distill_obj = Distill(locals())
    distill_obj.distill()
    distill_obj.maybe_write_checkpoint()
    distill_obj.maybe_write_report()
    distill_obj.echo_metrics()


if __name__ == "__main__":
    cli()
