import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..constants import (
    APP_VERSION,
    DEFAULT_EPOCH_SETTINGS,
    DEFAULT_VECTOR_COUNT,
    MAX_DISTINCT_VECTORS,
    N_AUGMENTATIONS,
    OPTIMIZERS,
    VECTOR_BIT_PROBABILITY,
)
from ..exceptions import StoreException, ValidationException
from ..models import AugmentationParams, AugVector, ClassifierSpec, HyperParams, RunSpec
from ..utils import stable_hash

logger = logging.getLogger(__name__)


def generate_vectors(n: int = DEFAULT_VECTOR_COUNT, seed: int = 0) -> List[AugVector]:
    """
    n различных ненулевых векторов: каждый бит независимо с вероятностью 0.5,
    повторы и нулевой вектор отбрасываются и перетягиваются
    """
    if n < 1:
        raise ValidationException("Количество векторов должно быть не меньше 1")
    if n > MAX_DISTINCT_VECTORS:
        raise ValidationException(
            f"Нельзя выбрать {n} различных ненулевых векторов, доступно {MAX_DISTINCT_VECTORS}"
        )

    rng = np.random.default_rng(seed)
    seen = set()
    vectors = []
    while len(vectors) < n:
        bits = tuple(bool(b) for b in rng.random(N_AUGMENTATIONS) < VECTOR_BIT_PROBABILITY)
        if not any(bits) or bits in seen:
            continue
        seen.add(bits)
        vectors.append(AugVector(bits))
    return vectors


def default_hyperparams() -> List[HyperParams]:
    """[SGD/20, SGD/15, Adam/20, Adam/15]"""
    return [
        HyperParams.default(optimizer, epochs)
        for optimizer in OPTIMIZERS
        for epochs in DEFAULT_EPOCH_SETTINGS
    ]


@dataclass(frozen=True)
class ExperimentGrid:
    classifiers: Tuple[ClassifierSpec, ...]
    hyperparams: Tuple[HyperParams, ...]
    vectors: Tuple[AugVector, ...]
    seed_base: int

    def __post_init__(self):
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(self, "hyperparams", tuple(self.hyperparams))
        object.__setattr__(self, "vectors", tuple(self.vectors))
        self.validate()

    def validate(self):
        if not self.classifiers or not self.hyperparams or not self.vectors:
            raise ValidationException(
                "Сетка должна содержать классификаторы, гиперпараметры и векторы"
            )
        if len({c.id for c in self.classifiers}) != len(self.classifiers):
            raise ValidationException("Идентификаторы классификаторов повторяются")
        if len({hp.descriptor for hp in self.hyperparams}) != len(self.hyperparams):
            raise ValidationException("Настройки гиперпараметров повторяются")
        if len(set(self.vectors)) != len(self.vectors):
            raise ValidationException("Векторы аугментаций повторяются")
        if any(v.is_zero for v in self.vectors):
            raise ValidationException("Нулевой вектор не входит в сетку эксперимента")

    @property
    def size(self) -> int:
        return len(self.classifiers) * len(self.hyperparams) * len(self.vectors)

    def summary(self) -> str:
        return (
            f"{len(self.classifiers)}×{len(self.hyperparams)}×{len(self.vectors)}"
            f" = {self.size} runs"
        )

    def as_dict(self) -> Dict:
        return {
            "classifiers": [c.as_dict() for c in self.classifiers],
            "hyperparams": [hp.as_dict() for hp in self.hyperparams],
            "vectors": [v.to_string() for v in self.vectors],
            "seed_base": self.seed_base,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentGrid":
        return cls(
            classifiers=[ClassifierSpec.from_dict(c) for c in data["classifiers"]],
            hyperparams=[HyperParams.from_dict(hp) for hp in data["hyperparams"]],
            vectors=[AugVector.from_string(v) for v in data["vectors"]],
            seed_base=int(data["seed_base"]),
        )


def run_seed(seed_base: int, classifier_id: str, hp_index: int, vector: AugVector) -> int:
    return stable_hash(seed_base, classifier_id, hp_index, vector.to_string())


def _make_runs(grid: ExperimentGrid, vectors: Sequence[AugVector]) -> List[RunSpec]:
    runs = []
    for classifier in grid.classifiers:
        for hp_index, hp in enumerate(grid.hyperparams):
            for vector in vectors:
                runs.append(
                    RunSpec(
                        index=len(runs),
                        classifier=classifier,
                        hp_index=hp_index,
                        hyperparams=hp,
                        vector=vector,
                        seed=run_seed(grid.seed_base, classifier.id, hp_index, vector),
                    )
                )
    return runs


def enumerate_runs(grid: ExperimentGrid) -> List[RunSpec]:
    """Декартово произведение (классификатор, гиперпараметры, вектор) со своими сидами"""
    return _make_runs(grid, grid.vectors)


def baseline_runs(grid: ExperimentGrid) -> List[RunSpec]:
    """Запуски без аугментаций, по одному на классификатор и гиперпараметры"""
    return _make_runs(grid, [AugVector.zero()])


def check_seed_collisions(runs: Sequence[RunSpec]) -> int:
    seeds = [run.seed for run in runs]
    duplicates = len(seeds) - len(set(seeds))
    if duplicates:
        raise ValidationException(f"Совпадение сидов у {duplicates} запусков")
    return len(seeds)


@dataclass(frozen=True)
class Plan:
    grid: ExperimentGrid
    runs: Tuple[RunSpec, ...]
    augmentation: AugmentationParams = field(default_factory=AugmentationParams)

    def __len__(self):
        return len(self.runs)


def build_plan(grid: ExperimentGrid, augmentation: AugmentationParams) -> Plan:
    runs = enumerate_runs(grid)
    check_seed_collisions(runs)
    logger.info(f"Designed grid {grid.summary()}")
    return Plan(grid, tuple(runs), augmentation)


def save_plan(plan: Plan, path) -> Path:
    path = Path(path)
    document = {
        "version": APP_VERSION,
        "summary": plan.grid.summary(),
        "grid": plan.grid.as_dict(),
        "augmentation": plan.augmentation.as_dict(),
        "runs": [run.as_dict() for run in plan.runs],
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2, ensure_ascii=False), encoding="utf-8")
    except OSError as e:
        raise StoreException(f"Не удалось записать план {path}: {e}")
    logger.info(f"Plan with {len(plan)} runs written to {path}")
    return path


def load_plan(path) -> Plan:
    from ..serializers import PlanSerializer

    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationException(f"План {path} не найден")
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationException(f"Не удалось прочитать план {path}: {e}")

    serializer = PlanSerializer(data=document)
    if not serializer.is_valid():
        raise ValidationException(f"Неверный план {path}: {serializer.errors}")
    data = serializer.validated_data

    grid = ExperimentGrid.from_dict(data["grid"])
    runs = tuple(RunSpec.from_dict(run) for run in data["runs"])
    return Plan(grid, runs, AugmentationParams.from_dict(data.get("augmentation")))
