import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from ..exceptions import ValidationException
from ..models import AugmentationParams, AugVector, ClassifierSpec, HyperParams
from ..services.design import (
    ExperimentGrid,
    baseline_runs,
    build_plan,
    check_seed_collisions,
    default_hyperparams,
    enumerate_runs,
    generate_vectors,
    load_plan,
    save_plan,
)


class GenerateVectorsTest(SimpleTestCase):
    """Тесты для генерации векторов аугментаций"""

    def test_distinct_and_nonzero(self):
        """Тест что векторы различны и ненулевые"""
        vectors = generate_vectors(28, seed=0)
        self.assertEqual(len(vectors), 28)
        self.assertEqual(len(set(vectors)), 28)
        self.assertFalse(any(v.is_zero for v in vectors))

    def test_all_vectors(self):
        """Тест что n=511 дает все ненулевые векторы"""
        vectors = generate_vectors(511, seed=1)
        self.assertEqual(len(set(vectors)), 511)

    def test_deterministic(self):
        """Тест что одинаковый сид дает одинаковый список"""
        self.assertEqual(generate_vectors(28, seed=5), generate_vectors(28, seed=5))
        self.assertNotEqual(generate_vectors(28, seed=5), generate_vectors(28, seed=6))

    def test_bit_frequency(self):
        """Тест что частота каждого бита близка к 0.5"""
        bits = np.array([v.as_array() for v in generate_vectors(400, seed=3)])
        frequencies = bits.mean(axis=0)
        self.assertTrue(np.all((frequencies >= 0.4) & (frequencies <= 0.6)), frequencies)

    def test_bounds(self):
        """Тест границ количества векторов"""
        with self.assertRaises(ValidationException):
            generate_vectors(512)
        with self.assertRaises(ValidationException):
            generate_vectors(0)


class ExperimentGridTest(SimpleTestCase):
    """Тесты для сетки эксперимента и плана"""

    def setUp(self):
        self.classifiers = [
            ClassifierSpec("linear-softmax", "linear-softmax"),
            ClassifierSpec("mlp", "mlp"),
        ]
        self.vectors = generate_vectors(28, seed=0)

    def make_grid(self, **kwargs):
        values = {
            "classifiers": self.classifiers,
            "hyperparams": default_hyperparams(),
            "vectors": self.vectors,
            "seed_base": 0,
        }
        values.update(kwargs)
        return ExperimentGrid(**values)

    def test_default_hyperparams(self):
        """Тест набора гиперпараметров по умолчанию"""
        labels = [hp.label for hp in default_hyperparams()]
        self.assertEqual(labels, ["SGD/20", "SGD/15", "Adam/20", "Adam/15"])
        self.assertEqual(default_hyperparams()[0].learning_rate, 0.01)
        self.assertEqual(default_hyperparams()[2].learning_rate, 0.001)

    def test_full_grid(self):
        """Тест 2 x 4 x 28 = 224 запуска"""
        grid = self.make_grid()
        runs = enumerate_runs(grid)
        self.assertEqual(len(runs), 224)
        self.assertEqual(grid.summary(), "2×4×28 = 224 runs")
        self.assertEqual(len({run.key for run in runs}), 224)
        self.assertEqual(check_seed_collisions(runs), 224)

    def test_single_run_grid(self):
        """Тест сетки 1 x 1 x 1"""
        grid = self.make_grid(
            classifiers=self.classifiers[:1],
            hyperparams=[HyperParams("sgd", 1, 0.01)],
            vectors=self.vectors[:1],
        )
        self.assertEqual(len(enumerate_runs(grid)), 1)

    def test_seed_follows_triple(self):
        """Тест что сид запуска не зависит от порядка векторов"""
        forward = {run.key: run.seed for run in enumerate_runs(self.make_grid())}
        backward = {
            run.key: run.seed
            for run in enumerate_runs(self.make_grid(vectors=self.vectors[::-1]))
        }
        self.assertEqual(forward, backward)

    def test_seed_base_changes_seeds(self):
        """Тест что другой базовый сид меняет сиды запусков"""
        first = [run.seed for run in enumerate_runs(self.make_grid(seed_base=0))]
        second = [run.seed for run in enumerate_runs(self.make_grid(seed_base=1))]
        self.assertNotEqual(first, second)

    def test_zero_vector_rejected(self):
        """Тест что нулевой вектор не допускается в сетку"""
        with self.assertRaises(ValidationException):
            self.make_grid(vectors=[AugVector.zero()] + self.vectors)

    def test_duplicates_rejected(self):
        """Тест повторяющихся классификаторов и векторов"""
        with self.assertRaises(ValidationException):
            self.make_grid(classifiers=self.classifiers * 2)
        with self.assertRaises(ValidationException):
            self.make_grid(vectors=self.vectors[:2] * 2)
        with self.assertRaises(ValidationException):
            self.make_grid(hyperparams=[])

    def test_baseline_runs(self):
        """Тест опорных запусков без аугментаций"""
        runs = baseline_runs(self.make_grid())
        self.assertEqual(len(runs), 8)
        self.assertTrue(all(run.vector.is_zero for run in runs))

    def test_save_and_load_plan(self):
        """Тест записи плана и чтения с валидацией"""
        plan = build_plan(self.make_grid(seed_base=9), AugmentationParams())
        with tempfile.TemporaryDirectory() as tmp:
            path = save_plan(plan, Path(tmp) / "nested" / "plan.json")
            document = json.loads(path.read_text(encoding="utf-8"))
            loaded = load_plan(path)
        self.assertEqual(document["summary"], "2×4×28 = 224 runs")
        self.assertEqual(loaded.grid, plan.grid)
        self.assertEqual(loaded.runs, plan.runs)

    def test_load_invalid_plan(self):
        """Тест отсутствующего и поврежденного плана"""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValidationException):
                load_plan(Path(tmp) / "missing.json")
            broken = Path(tmp) / "broken.json"
            broken.write_text('{"grid": {}}', encoding="utf-8")
            with self.assertRaises(ValidationException):
                load_plan(broken)
