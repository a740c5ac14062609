"""CLI interface for sentibench."""
import functools
import json
import logging
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.text import Text

from . import __version__
from .config import DEFAULTS, MODEL_NAMES, load_config, parse_override, save_config
from .errors import SentibenchError
from .harness import BenchmarkHarness
from .synthetic import generate_corpus, write_corpus


def _setup_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _print_error(console: Console, module: str, message: str) -> None:
    console.print(Text.assemble((f"Error [{module}]:", "bold red"), " ", message), soft_wrap=True)


def common_options(fn):
    """Flags shared by every experiment command."""
    options = [
        click.option('-c', '--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None, help='Experiment config (.toml or .json)'),
        click.option('--seed', type=click.IntRange(0, 2**64 - 1), default=None, help='Global seed'),
        click.option('-o', '--out', type=click.Path(file_okay=False), default=None, help='Output directory'),
        click.option('-d', '--data', type=click.Path(), default=None, help='Dataset path'),
        click.option('--format', 'data_format', type=click.Choice(['csv', 'jsonl']), default=None, help='Dataset format (default: from suffix)'),
        click.option('--set', 'assignments', multiple=True, metavar='KEY=VALUE', help='Override any config key, e.g. --set nb.alpha=0.5'),
        click.option('-j', '--jobs', default=1, show_default=True, type=click.IntRange(1), help='Worker threads'),
        click.option('--verbose', is_flag=True, help='Verbose logs'),
        click.option('--quiet', is_flag=True, help='Minimal logs'),
        click.option('--log-json', is_flag=True, help='Print the final report as JSON on stdout'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run(stdout_report: bool = False):
    """Build config + harness from common flags, report errors the same way everywhere.

    With ``stdout_report`` the final report goes to stdout as JSON even without ``--log-json``.
    """

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(config_path, seed, out, data, data_format, assignments, jobs, verbose, quiet, log_json, **kwargs):
            _setup_logging(verbose, quiet)
            console = Console(stderr=True, quiet=quiet)
            try:
                overrides = dict(parse_override(a) for a in assignments)
                for key, value in (("seed", seed), ("output_dir", out), ("data.path", data), ("data.format", data_format)):
                    if value is not None:
                        overrides[key] = value
                config = load_config(config_path, overrides)
                harness = BenchmarkHarness(config, jobs=jobs, quiet=quiet, console=console)
                ok = fn(harness, **kwargs)
                if log_json or stdout_report:
                    click.echo(json.dumps(harness.get_last_report(), ensure_ascii=False))
            except KeyboardInterrupt:
                console.print("[yellow]Cancelled by user.[/yellow]")
                raise click.exceptions.Exit(130)
            except SentibenchError as e:
                _print_error(console, e.module, str(e))
                raise click.exceptions.Exit(1)
            if ok is False:
                raise click.exceptions.Exit(1)

        return wrapper

    return decorate


@click.group(context_settings=dict(help_option_names=['-h', '--help']))
@click.version_option(version=__version__)
def main():
    """sentibench - Three-class sentiment classifiers and a reproducible benchmark.

    \b
    Example usage:
        sentibench init exp.json
        sentibench generate data/synthetic.csv --n-docs 6000
        sentibench train --model nb --config exp.json
        sentibench evaluate out/nb.model --config exp.json
        sentibench compare --config exp.json --jobs 3
    """


@main.command()
@click.option('-m', '--model', required=True, type=click.Choice(list(MODEL_NAMES)), help='Pipeline to train')
@common_options
@_run()
def train(harness: BenchmarkHarness, model: str):
    """Train one pipeline and write <out>/<model>.model plus its manifest."""
    harness.train(model)


@main.command()
@click.argument('artifact', type=click.Path(exists=True, dir_okay=False))
@click.option('--all', 'whole_dataset', is_flag=True, help='Score every document, not only the held-out split')
@common_options
@_run(stdout_report=True)
def evaluate(harness: BenchmarkHarness, artifact: str, whole_dataset: bool):
    """Apply a trained artifact; print the metrics JSON and write <out>/<model>.metrics.json."""
    harness.evaluate(Path(artifact), whole_dataset=whole_dataset)


@main.command()
@click.option('-m', '--models', default=','.join(MODEL_NAMES), show_default=True, help='Comma-separated pipelines to compare')
@common_options
@_run()
def compare(harness: BenchmarkHarness, models: str):
    """Train every pipeline on one shared split; write compare.json and compare.txt."""
    selected = [m.strip() for m in models.split(',') if m.strip()]
    unknown = sorted(set(selected) - set(MODEL_NAMES))
    if unknown:
        raise click.BadParameter(f"unknown model(s): {', '.join(unknown)}", param_hint='--models')
    return harness.compare(selected)["complete"]


@main.command()
@click.argument('output', type=click.Path(dir_okay=False))
@click.option('-n', '--n-docs', default=6000, show_default=True, type=click.IntRange(1), help='Number of documents')
@click.option('--seed', default=0, show_default=True, type=click.IntRange(0, 2**64 - 1), help='Generator seed')
@click.option('--turnaround-fraction', default=0.5, show_default=True, type=click.FloatRange(0, 1), help='Share of polar documents that close on an opposite remark')
@click.option('--rare-fraction', default=0.2, show_default=True, type=click.FloatRange(0, 1), help='Share of other polar documents using a rare lexicon word')
@click.option('--noise-fraction', default=0.2, show_default=True, type=click.FloatRange(0, 1), help='Share of documents with social-media noise')
@click.option('--format', 'data_format', type=click.Choice(['csv', 'jsonl']), default=None, help='Output format (default: from suffix)')
@click.option('--quiet', is_flag=True, help='Minimal logs')
def generate(output, n_docs, seed, turnaround_fraction, rare_fraction, noise_fraction, data_format, quiet):
    """Write a synthetic labeled corpus with planted lexicon and word-order signal."""
    console = Console(stderr=True, quiet=quiet)
    try:
        docs = generate_corpus(
            n_docs, seed=seed, turnaround_fraction=turnaround_fraction, rare_fraction=rare_fraction,
            noise_fraction=noise_fraction,
        )
        path = write_corpus(docs, output, data_format)
    except SentibenchError as e:
        _print_error(console, e.module, str(e))
        raise click.exceptions.Exit(1)
    console.print(f"[green]✓ Wrote {len(docs)} documents to:[/green] {path}")


@main.command()
@click.argument('output', type=click.Path(dir_okay=False), default='sentibench.json')
@click.option('--seed', default=0, show_default=True, type=click.IntRange(0, 2**64 - 1), help='Seed written into the config')
@click.option('--force', is_flag=True, help='Overwrite an existing file')
def init(output, seed, force):
    """Write a complete default config file."""
    console = Console(stderr=True)
    path = Path(output)
    if path.exists() and not force:
        _print_error(console, "config", f"{path} exists (use --force to overwrite)")
        raise click.exceptions.Exit(1)
    save_config({**DEFAULTS, "seed": seed}, path)
    console.print(f"[green]Configuration saved:[/green] {path}")


if __name__ == '__main__':
    main()
