# -*- coding: utf-8 -*-

# Import modified 'os' module with LC_LANG set so click doesn't complain
from graphdistill import os_utils  # noqa: F401

# Python standard library imports
import logging
from functools import partial

# 3rd party libraries
import click

# Within-module imports
from graphdistill.datasets import cli as dataset
from graphdistill.distill import cli as distill
from graphdistill.evaluate import cli as evaluate
from graphdistill.experiment import cli as experiment
from graphdistill.log_utils import set_level
from graphdistill.train_teacher import cli as train_teacher

click.option = partial(click.option, show_default=True)

settings = dict(help_option_names=["-h", "--help"])


@click.group(
    options_metavar="[--verbose|--quiet]",
    subcommand_metavar="<command>",
    context_settings=settings,
)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging and progress bars")
@click.option("--quiet", "-q", is_flag=True, help="Only log warnings and errors")
def cli(verbose, quiet):
    """
    Graph knowledge distillation: train a GCN teacher, distill it into
    boosted MLP students that predict from node features alone, and run
    the experiment studies comparing them with baseline students
    """
    if verbose:
        set_level(logging.DEBUG)
    elif quiet:
        set_level(logging.WARNING)


cli.add_command(dataset, name="dataset")
cli.add_command(train_teacher, name="train-teacher")
cli.add_command(distill, name="distill")
cli.add_command(evaluate, name="eval")
cli.add_command(experiment, name="experiment")

if __name__ == "__main__":
    cli()
