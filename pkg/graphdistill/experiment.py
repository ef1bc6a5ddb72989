"""
experiment.py

Command line entry that runs an experiment spec file and writes its report
"""
import os
from dataclasses import replace

import click

from graphdistill.create_save_summary import emit_report
from graphdistill.errors import exit_on_error
from graphdistill.harness import ExperimentSpec, plan_runs, run_experiment, with_output
from graphdistill.log_utils import get_logger

logger = get_logger(__file__)

BUNDLED_SPECS = os.path.join(os.path.dirname(__file__), "specs")


def resolve_spec_path(path):
    """A path on disk, or the name of a spec bundled with the package"""
    if os.path.exists(path):
        return path
    bundled = os.path.join(BUNDLED_SPECS, os.path.basename(path))
    if not bundled.endswith(".json"):
        bundled += ".json"
    if os.path.exists(bundled):
        return bundled
    raise click.BadParameter(
        f"{path!r} is neither a file nor one of the bundled specs "
        f"{sorted(os.listdir(BUNDLED_SPECS))}",
        param_hint="SPEC_PATH",
    )


class Experiment:
    def __init__(self, args):
        self.args = args
        for key in args:
            setattr(self, key, args[key])
        self.spec = ExperimentSpec.from_json(resolve_spec_path(self.spec_path))
        if self.n_jobs is not None:
            self.spec = replace(self.spec, n_jobs=self.n_jobs)
        self.spec = with_output(self.spec, self.get_output_path())

    def get_output_path(self):
        extension = "jsonl" if self.spec.format == "jsonl" else "csv"
        filename = (
            os.path.basename(self.spec.output)
            if self.spec.output
            else f"{self.spec.name}.{extension}"
        )
        if self.out_dir is not None:
            return os.path.join(self.out_dir, filename)
        return self.spec.output or filename

    def echo_plan(self):
        runs = plan_runs(self.spec)
        click.echo("\t".join(["experiment", "method", "grid_key", "grid_value", "seed"]))
        for run in runs:
            click.echo("\t".join(str(value) for value in run))
        click.echo(f"{len(runs)} runs planned, rows go to {self.spec.output}")

    def run(self):
        self.rows = run_experiment(self.spec)
        self.summary_path = emit_report(self.rows, self.spec.output, self.spec.format)
        click.echo(f"Wrote {len(self.rows)} rows to {self.spec.output}")
        if self.summary_path:
            click.echo(f"Wrote summary to {self.summary_path}")


@click.command()
@click.argument("spec_path")
@click.option("--out-dir", default=None, help="Directory overriding the spec's output path")
@click.option("--dry-run", is_flag=True, help="Print the planned runs without training")
@click.option("--n-jobs", type=int, default=None, help="Worker threads, capped by GDB_THREADS")
@exit_on_error
def cli(spec_path, out_dir, dry_run, n_jobs):
    """Run the experiment described by SPEC_PATH

    SPEC_PATH is a JSON spec file or the name of a bundled spec such as
    ensemble_compare_sbm.json.
    """
    experiment_obj = Experiment(locals())
    if dry_run:
        experiment_obj.echo_plan()
        return
    experiment_obj.run()


if __name__ == "__main__":
    cli()
