"""Benchmark orchestrator: train, evaluate and compare pipelines."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from .artifacts import check_fingerprint, load_artifact, write_json
from .config import MODEL_NAMES, ExperimentConfig
from .corpus import (
    LabeledDocument,
    dataset_fingerprint,
    label_distribution,
    load_dataset,
    split_fingerprint,
    split_indices,
)
from .errors import DatasetError, SentibenchError
from .evaluation import MetricsReport, comparison_table, evaluate_predictions, render_text
from .pipelines import get_pipeline, list_pipelines, load_pipeline
from .pipelines.base import BasePipeline

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedData:
    docs: List[LabeledDocument]
    train: List[LabeledDocument]
    test: List[LabeledDocument]
    dataset_fingerprint: str
    split_fingerprint: str

    def class_distribution(self) -> Dict[str, Dict[str, int]]:
        return {
            "all": label_distribution(self.docs),
            "train": label_distribution(self.train),
            "test": label_distribution(self.test),
        }


class BenchmarkHarness:
    """Runs the benchmark commands against one experiment configuration.

    Progress and status lines go to a stderr console; results are written as
    JSON files under ``config.output_dir``.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        jobs: int = 1,
        quiet: bool = False,
        console: Optional[Console] = None,
    ):
        """Initialize the harness.

        Args:
            config: Validated experiment configuration
            jobs: Worker threads for compare (one pipeline per worker) and
                  for forest fitting
            quiet: Suppress progress output
            console: Console to print to (default: stderr)
        """
        self.config = config
        self.jobs = max(1, int(jobs))
        self.quiet = quiet
        self.console = console or Console(stderr=True, quiet=quiet)
        self.output_dir = Path(config.output_dir)
        self._last_report: Dict[str, Any] = {}

    def get_last_report(self) -> Dict[str, Any]:
        return dict(self._last_report) if self._last_report else {}

    # --- Data ---

    def _load_docs(self) -> Tuple[List[LabeledDocument], str]:
        path = self.config.data.path
        self.console.print(f"[cyan]Loading dataset:[/cyan] {path}")
        docs = load_dataset(path, self.config.data.format)
        if not docs:
            raise DatasetError("dataset has no documents", path=str(path))
        self.console.print(f"[cyan]Documents:[/cyan] {len(docs)}  [cyan]Labels:[/cyan] {label_distribution(docs)}")
        return docs, dataset_fingerprint(path)

    def prepare_data(self) -> PreparedData:
        """Load the dataset and apply the configured train/test split."""
        docs, fingerprint = self._load_docs()
        train_idx, test_idx = split_indices([d.label for d in docs], self.config.split_config())
        self.console.print(f"[cyan]Split:[/cyan] {len(train_idx)} train / {len(test_idx)} test")
        return PreparedData(
            docs=docs,
            train=[docs[i] for i in train_idx],
            test=[docs[i] for i in test_idx],
            dataset_fingerprint=fingerprint,
            split_fingerprint=split_fingerprint(train_idx, test_idx),
        )

    # --- Train ---

    def _progress(self) -> Progress:
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=self.console,
            disable=self.quiet,
        )

    def _fit(self, pipeline: BasePipeline, data: PreparedData, progress: Progress, n_jobs: int) -> MetricsReport:
        task = progress.add_task(f"[green]Training {pipeline.name()}...", total=pipeline.training_units())

        def on_progress(done: int, total: int) -> None:
            progress.update(task, completed=done, total=total)

        pipeline.fit(data.train, n_jobs=n_jobs, on_progress=on_progress)
        progress.update(task, completed=pipeline.training_units())
        return evaluate_predictions([d.label for d in data.test], pipeline.predict([d.text for d in data.test]))

    def _write_model(
        self, pipeline: BasePipeline, data: PreparedData, report: MetricsReport, wall_time: float
    ) -> Path:
        artifact_path = self.output_dir / f"{pipeline.kind}.model"
        pipeline.save(
            artifact_path,
            {"dataset_fingerprint": data.dataset_fingerprint, "split_fingerprint": data.split_fingerprint},
        )
        write_json(
            self.output_dir / f"{pipeline.kind}.manifest.json",
            {
                "model": pipeline.kind,
                "name": pipeline.name(),
                "artifact": artifact_path.name,
                "seed": self.config.seed,
                "dataset_fingerprint": data.dataset_fingerprint,
                "split_fingerprint": data.split_fingerprint,
                "fingerprints": pipeline.fingerprints(),
                "class_distribution": data.class_distribution(),
                "wall_time_sec": round(wall_time, 3),
                "metrics": report.to_dict(),
                "config": self.config.to_dict(),
            },
        )
        return artifact_path

    def train(self, model: str) -> Path:
        """Preprocess, split, fit one pipeline and write its artifact and manifest."""
        self.config.validate_files([model])
        start = time.perf_counter()
        pipeline = get_pipeline(model, self.config)
        data = self.prepare_data()
        with self._progress() as progress:
            report = self._fit(pipeline, data, progress, self.jobs)
        artifact_path = self._write_model(pipeline, data, report, time.perf_counter() - start)
        self._last_report = {"model": model, "artifact": str(artifact_path), "metrics": report.to_dict()}
        self.console.print(f"[cyan]Held-out accuracy:[/cyan] {report.accuracy:.4f}")
        self.console.print(f"[green]✓ Saved {pipeline.name()} model to:[/green] {artifact_path}")
        return artifact_path

    # --- Evaluate ---

    def evaluate(self, artifact_path: Path, whole_dataset: bool = False) -> MetricsReport:
        """Apply a trained artifact and write ``<kind>.metrics.json``.

        On the dataset it was trained on the artifact is scored on the same
        held-out split (the partition must match the one recorded at training
        time); on any other dataset, or with ``whole_dataset``, every document
        is scored.
        """
        meta = load_artifact(artifact_path).meta
        self.config.validate_files([meta["kind"]])
        pipeline = load_pipeline(artifact_path, self.config)
        self.console.print(f"[cyan]Model:[/cyan] {pipeline.name()} ({artifact_path})")
        docs, fingerprint = self._load_docs()
        evaluated_on = "all"
        if not whole_dataset and fingerprint == meta.get("dataset_fingerprint"):
            train_idx, test_idx = split_indices([d.label for d in docs], self.config.split_config())
            check_fingerprint("split", meta.get("split_fingerprint"), split_fingerprint(train_idx, test_idx))
            docs = [docs[i] for i in test_idx]
            evaluated_on = "test"
        self.console.print(f"[cyan]Evaluating on:[/cyan] {evaluated_on} ({len(docs)} documents)")

        predictions = pipeline.predict([d.text for d in docs])
        report = evaluate_predictions([d.label for d in docs], predictions)
        per_source: Dict[str, Any] = {}
        for source in sorted({d.source for d in docs}):
            rows = [i for i, d in enumerate(docs) if d.source == source]
            per_source[source] = evaluate_predictions(
                [docs[i].label for i in rows], [predictions[i] for i in rows]
            ).to_dict()

        result = {
            "model": pipeline.kind,
            "name": pipeline.name(),
            "dataset_fingerprint": fingerprint,
            "evaluated_on": evaluated_on,
            "n_documents": len(docs),
            "metrics": report.to_dict(),
            "per_source": per_source,
        }
        metrics_path = write_json(self.output_dir / f"{pipeline.kind}.metrics.json", result)
        self._last_report = {**result, "metrics_path": str(metrics_path)}
        self.console.print(render_text(comparison_table({pipeline.name(): report}, title="Evaluation")), end="")
        self.console.print(f"[green]✓ Metrics written to:[/green] {metrics_path}")
        return report

    # --- Compare ---

    def compare(self, models: Sequence[str] = MODEL_NAMES) -> Dict[str, Any]:
        """Train every pipeline on one shared split and write ``compare.json``.

        A failing pipeline does not stop the others; the report is then marked
        incomplete and the failure recorded on its row.
        """
        models = [m for m in list_pipelines() if m in models]
        self.config.validate_files(models)
        data = self.prepare_data()
        pipelines = [get_pipeline(m, self.config) for m in models]
        results: Dict[str, Tuple[Optional[MetricsReport], Optional[str]]] = {}

        def run_one(pipeline: BasePipeline, progress: Progress, n_jobs: int):
            start = time.perf_counter()
            try:
                report = self._fit(pipeline, data, progress, n_jobs)
            except SentibenchError as exc:
                logger.debug("%s failed", pipeline.kind, exc_info=True)
                return None, f"[{exc.module}] {exc}"
            self._write_model(pipeline, data, report, time.perf_counter() - start)
            return report, None

        with self._progress() as progress:
            if self.jobs > 1:
                with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                    futures = {p.kind: executor.submit(run_one, p, progress, 1) for p in pipelines}
                    results = {kind: future.result() for kind, future in futures.items()}
            else:
                results = {p.kind: run_one(p, progress, 1) for p in pipelines}

        rows = []
        for pipeline in pipelines:
            report, error = results[pipeline.kind]
            if error is not None:
                self.console.print(f"[red]Error training {pipeline.name()}:[/red] {escape(error)}")
            rows.append(
                {
                    "model": pipeline.kind,
                    "name": pipeline.name(),
                    "metrics": None if report is None else report.to_dict(),
                    "error": error,
                }
            )
        summary = {
            "complete": all(row["error"] is None for row in rows),
            "seed": self.config.seed,
            "dataset_fingerprint": data.dataset_fingerprint,
            "split_fingerprint": data.split_fingerprint,
            "class_distribution": data.class_distribution(),
            "models": rows,
        }
        table = comparison_table({p.name(): results[p.kind][0] for p in pipelines})
        write_json(self.output_dir / "compare.json", summary)
        (self.output_dir / "compare.txt").write_text(render_text(table), encoding="utf-8")
        self._last_report = summary
        self.console.print(table)
        if summary["complete"]:
            self.console.print(f"[green]✓ Comparison written to:[/green] {self.output_dir / 'compare.json'}")
        else:
            self.console.print(f"[yellow]Comparison incomplete; partial results in:[/yellow] {self.output_dir}")
        return summary
