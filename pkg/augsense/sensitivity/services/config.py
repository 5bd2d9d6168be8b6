import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from django.conf import settings

from ..constants import (
    DEFAULT_VECTOR_COUNT,
    PLAN_FILENAME,
    SENSITIVITY_THRESHOLD,
    STORE_FILENAME,
    TOP_N_RELIABLE,
)
from ..exceptions import ConfigurationException
from ..models import AugmentationParams, ClassifierSpec, HyperParams
from ..utils import deep_merge, parse_override, set_nested

logger = logging.getLogger(__name__)

FASHION_MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte.gz",
    "train_labels": "train-labels-idx1-ubyte.gz",
    "test_images": "t10k-images-idx3-ubyte.gz",
    "test_labels": "t10k-labels-idx1-ubyte.gz",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Проверенная конфигурация одного запуска команды"""

    data_dir: Path
    data_files: Tuple[Tuple[str, str], ...]
    subsample: Optional[int]
    augmentation: AugmentationParams
    classifiers: Tuple[ClassifierSpec, ...]
    hyperparams: Tuple[HyperParams, ...]
    vector_count: int
    seed: int
    output_dir: Path
    plan_path: Path
    store_path: Path
    analysis_dir: Path
    report_dir: Path
    workers: int
    save_models: bool
    metric: str
    reliability_mode: str
    sensitivity_threshold: float
    top_n: int

    def data_path(self, name: str) -> Path:
        path = Path(dict(self.data_files)[name])
        return path if path.is_absolute() else self.data_dir / path

    def dataset_paths(self) -> Dict[str, Path]:
        return {name: self.data_path(name) for name, _ in self.data_files}

    def check_dataset(self):
        missing = [str(p) for p in self.dataset_paths().values() if not p.exists()]
        if missing:
            raise ConfigurationException(f"Файлы датасета не найдены: {', '.join(missing)}")


def default_document() -> Dict[str, Any]:
    """Документ конфигурации по умолчанию из настроек Django"""
    return {
        "data": {
            "dir": str(settings.AUGSENSE_DATA_DIR),
            **FASHION_MNIST_FILES,
            "subsample": settings.AUGSENSE_SUBSAMPLE or None,
        },
        "augmentation": {},
        "grid": {
            "classifiers": [{"id": c} for c in settings.AUGSENSE_CLASSIFIERS],
            "vector_count": DEFAULT_VECTOR_COUNT,
            "seed": settings.AUGSENSE_SEED,
        },
        "output_dir": str(settings.AUGSENSE_OUTPUT_DIR),
        "workers": settings.AUGSENSE_WORKERS,
        "save_models": False,
        "metric": settings.AUGSENSE_METRIC,
        "reliability_mode": settings.AUGSENSE_RELIABILITY_MODE,
        "sensitivity_threshold": SENSITIVITY_THRESHOLD,
        "top_n": TOP_N_RELIABLE,
    }


def _read_config_file(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigurationException(f"Файл конфигурации {path} не найден")
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationException(f"Не удалось прочитать конфигурацию {path}: {e}")
    if not isinstance(document, dict):
        raise ConfigurationException("Конфигурация должна быть JSON-объектом")
    return document


def load_config(
    path=None,
    overrides: Iterable[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """
    Объединяет настройки по умолчанию, JSON-файл, переопределения `--set key=value`
    и флаги команды (в порядке возрастания приоритета) и проверяет результат
    """
    from ..serializers import ConfigSerializer
    from .design import default_hyperparams

    document = default_document()
    if path:
        document = deep_merge(document, _read_config_file(path))
    for raw in overrides:
        try:
            key, value = parse_override(raw)
        except ValueError as e:
            raise ConfigurationException(f"Неверное переопределение: {e}")
        set_nested(document, key, value)
    for key, value in (flags or {}).items():
        if value is not None:
            set_nested(document, key, value)

    serializer = ConfigSerializer(data=document)
    if not serializer.is_valid():
        raise ConfigurationException(f"Неверная конфигурация: {serializer.errors}")
    data = serializer.validated_data

    grid = data["grid"]
    hyperparams = grid.get("hyperparams")
    output_dir = Path(data["output_dir"])
    config = PipelineConfig(
        data_dir=Path(data["data"]["dir"]),
        data_files=tuple((name, data["data"][name]) for name in FASHION_MNIST_FILES),
        subsample=data["data"].get("subsample"),
        augmentation=AugmentationParams.from_dict(data["augmentation"]),
        classifiers=tuple(ClassifierSpec.from_dict(c) for c in grid["classifiers"]),
        hyperparams=tuple(
            [HyperParams.from_dict(hp) for hp in hyperparams]
            if hyperparams
            else default_hyperparams()
        ),
        vector_count=grid["vector_count"],
        seed=grid["seed"],
        output_dir=output_dir,
        plan_path=Path(data.get("plan") or output_dir / PLAN_FILENAME),
        store_path=Path(data.get("store") or output_dir / STORE_FILENAME),
        analysis_dir=Path(data.get("analysis_dir") or output_dir / "analysis"),
        report_dir=Path(
            data.get("report_dir") or data.get("analysis_dir") or output_dir / "analysis"
        ),
        workers=data["workers"],
        save_models=data["save_models"],
        metric=data["metric"],
        reliability_mode=data["reliability_mode"],
        sensitivity_threshold=data["sensitivity_threshold"],
        top_n=data["top_n"],
    )
    logger.debug(f"Loaded configuration with output dir {config.output_dir}")
    return config
