import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

from ..constants import (
    ANALYSIS_MANIFEST_FILENAME,
    APP_VERSION,
    FITS_FILENAME,
    METRICS,
    METRICS_FILENAME,
    TENSOR_FILENAME,
)
from ..exceptions import AnalysisNotFoundException
from ..models import CoefficientTensor, MetricsRow, ResultTable, SurrogateFit
from ..utils import timing_decorator
from .design import Plan
from .metrics import compute_metrics, read_metrics_csv, write_metrics_csv
from .surrogate import (
    build_tensor,
    fit_cells,
    read_fits_csv,
    read_tensor_csv,
    write_fits_csv,
    write_tensor_csv,
)

logger = logging.getLogger(__name__)


@dataclass
class Analysis:
    """Результаты анализа, достаточные для построения отчета"""

    manifest: Dict
    fits: List[SurrogateFit]
    tensors: Dict[str, CoefficientTensor]
    rows: List[MetricsRow]

    @property
    def metric(self) -> str:
        return self.manifest["metric"]

    def hyperparam_labels(self) -> Dict[str, str]:
        return {hp["descriptor"]: hp["label"] for hp in self.manifest["hyperparams"]}


def hyperparam_entries(plan: Plan) -> List[Dict[str, str]]:
    """Короткие подписи SGD/20 и т.п.; при совпадении подписей остается дескриптор"""
    labels = [hp.label for hp in plan.grid.hyperparams]
    unique = len(set(labels)) == len(labels)
    return [
        {"descriptor": hp.descriptor, "label": hp.label if unique else hp.descriptor}
        for hp in plan.grid.hyperparams
    ]


@timing_decorator
def analyze(
    plan: Plan,
    table: ResultTable,
    out_dir,
    metric: str,
    reliability_mode: str,
    sensitivity_threshold: float,
    top_n: int,
) -> Analysis:
    """
    Регрессии по обеим метрикам, нормализованные тензоры и таблица метрик
    для выбранной метрики. Записывает fits.csv, tensor_*.csv, metrics.csv, analysis.json
    """
    grid = plan.grid
    classifier_ids = [c.id for c in grid.classifiers]
    descriptors = [hp.descriptor for hp in grid.hyperparams]

    fits: List[SurrogateFit] = []
    tensors: Dict[str, CoefficientTensor] = {}
    for name in METRICS:
        metric_fits = fit_cells(table, classifier_ids, descriptors, grid.vectors, name)
        fits.extend(metric_fits)
        tensors[name] = build_tensor(metric_fits, name, classifier_ids, descriptors)

    rows = compute_metrics(tensors[metric], sensitivity_threshold, top_n, reliability_mode)

    manifest = {
        "version": APP_VERSION,
        "metric": metric,
        "reliability_mode": reliability_mode,
        "sensitivity_threshold": sensitivity_threshold,
        "top_n": top_n,
        "classifier_ids": classifier_ids,
        "hyperparams": hyperparam_entries(plan),
        "n_records": len(table.done()),
        "n_failed": len(table.failed()),
        "evaluation_split": "test",
    }

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_fits_csv(fits, out_dir / FITS_FILENAME)
    for name, tensor in tensors.items():
        write_tensor_csv(tensor, out_dir / TENSOR_FILENAME.format(metric=name))
    write_metrics_csv(rows, out_dir / METRICS_FILENAME)
    (out_dir / ANALYSIS_MANIFEST_FILENAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    logger.info(f"Analysis of {len(fits)} fits written to {out_dir}")
    return Analysis(manifest, fits, tensors, rows)


def load_analysis(analysis_dir) -> Analysis:
    analysis_dir = Path(analysis_dir)
    manifest_path = analysis_dir / ANALYSIS_MANIFEST_FILENAME
    required = [manifest_path, analysis_dir / FITS_FILENAME, analysis_dir / METRICS_FILENAME]
    missing = [str(p) for p in required if not p.exists()]
    if missing:
        raise AnalysisNotFoundException(
            f"Результаты анализа не найдены: {', '.join(missing)}"
        )

    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    tensors = {}
    for name in METRICS:
        path = analysis_dir / TENSOR_FILENAME.format(metric=name)
        if path.exists():
            tensors[name] = read_tensor_csv(path, name)
    if manifest["metric"] not in tensors:
        raise AnalysisNotFoundException(
            f"Нет тензора коэффициентов для метрики {manifest['metric']}"
        )
    return Analysis(
        manifest=manifest,
        fits=read_fits_csv(analysis_dir / FITS_FILENAME),
        tensors=tensors,
        rows=read_metrics_csv(analysis_dir / METRICS_FILENAME),
    )
