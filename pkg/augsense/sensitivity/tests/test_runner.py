import csv
import json
import tempfile
from dataclasses import replace
from pathlib import Path
from unittest.mock import patch

from django.test import SimpleTestCase

from ..exceptions import (
    DuplicateRunException,
    ResultParseException,
    StoreException,
    TrainingDivergedException,
)
from ..models import RECORD_FIELDS, AugmentationParams, ClassifierSpec, HyperParams
from ..services.design import ExperimentGrid, build_plan, generate_vectors
from ..services.runner import ResultStore, execute, export_csv, load_results, run_one
from .fixtures import make_split, reference_plan, reference_records, write_store


def small_plan(n_vectors=3):
    grid = ExperimentGrid(
        classifiers=[ClassifierSpec("linear-softmax", "linear-softmax")],
        hyperparams=[HyperParams("sgd", 1, 0.01, batch_size=8)],
        vectors=generate_vectors(n_vectors, seed=2),
        seed_base=4,
    )
    return build_plan(grid, AugmentationParams())


def _without_timing(records):
    return [replace(record, seconds=0.0) for record in records]


class RunOneTest(SimpleTestCase):
    """Тесты для одного запуска"""

    def setUp(self):
        self.plan = small_plan(1)
        self.split = make_split(2)

    def test_done_record(self):
        """Тест завершенной записи с точностью и лоссом"""
        record = run_one(self.plan.runs[0], self.split, self.plan.augmentation)
        self.assertTrue(record.is_done)
        self.assertGreaterEqual(record.test_accuracy, 0.0)
        self.assertLessEqual(record.test_accuracy, 100.0)
        self.assertAlmostEqual(record.test_loss_scaled, record.test_loss * 100)
        self.assertEqual(record.key, self.plan.runs[0].key)

    @patch("sensitivity.services.runner.train")
    def test_failed_record(self, mock_train):
        """Тест что расхождение обучения дает запись failed"""
        mock_train.side_effect = TrainingDivergedException(3)
        record = run_one(self.plan.runs[0], self.split, self.plan.augmentation)
        self.assertTrue(record.is_failed)
        self.assertIsNone(record.test_accuracy)
        self.assertIn("3", record.error)

    def test_save_model(self):
        """Тест сохранения параметров обученной модели"""
        with tempfile.TemporaryDirectory() as tmp:
            run_one(self.plan.runs[0], self.split, self.plan.augmentation, model_dir=tmp)
            self.assertEqual(len(list(Path(tmp).glob("*.bin"))), 1)
            self.assertEqual(len(list(Path(tmp).glob("*.json"))), 1)


class ExecuteTest(SimpleTestCase):
    """Тесты для выполнения плана и дозаписи хранилища"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.store = Path(self.tmp.name) / "results.jsonl"
        self.plan = small_plan(3)
        self.split = make_split(2)

    def tearDown(self):
        self.tmp.cleanup()

    def run_plan(self, runs=None, **kwargs):
        return execute(
            runs or self.plan.runs, self.store, self.split, self.plan.augmentation, **kwargs
        )

    def test_execute_writes_every_run(self):
        """Тест что каждый запуск записан одной строкой"""
        table = self.run_plan()
        self.assertEqual((table.executed, table.skipped), (3, 0))
        lines = self.store.read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 3)
        self.assertEqual([r.key for r in table], [run.key for run in self.plan.runs])

    def test_rerun_executes_nothing(self):
        """Тест что повторный запуск ничего не переобучает"""
        first = self.run_plan()
        second = self.run_plan()
        self.assertEqual((second.executed, second.skipped), (0, 3))
        self.assertEqual(_without_timing(second.records), _without_timing(first.records))

    def test_resume_after_interruption(self):
        """Тест продолжения после прерывания: дообучаются только недостающие"""
        self.run_plan(runs=self.plan.runs[:2])
        table = self.run_plan()
        self.assertEqual((table.executed, table.skipped), (1, 2))
        self.assertEqual(len(ResultStore(self.store).read()), 3)

    def test_failed_runs_not_retried(self):
        """Тест что запуски failed записываются и не повторяются"""
        with patch(
            "sensitivity.services.runner.train",
            side_effect=TrainingDivergedException(3),
        ):
            table = self.run_plan()
        self.assertEqual(len(table.failed()), 3)
        self.assertEqual(self.run_plan().executed, 0)

    def test_model_save_error_is_recorded(self):
        """Тест что ошибка сохранения модели дает запись failed, а план выполняется дальше"""
        with patch(
            "sensitivity.services.runner.save_model",
            side_effect=[None, OSError("disk full"), None],
        ):
            table = self.run_plan(model_dir=Path(self.tmp.name) / "models")
        self.assertEqual(table.executed, 3)
        self.assertEqual(len(ResultStore(self.store).read()), 3)
        failed = table.failed()
        self.assertEqual([r.key for r in failed], [self.plan.runs[1].key])
        self.assertIn("disk full", failed[0].error)

    def test_callback(self):
        """Тест вызова обработчика на каждую запись"""
        seen = []
        self.run_plan(on_record=lambda position, total, record: seen.append(position))
        self.assertEqual(seen, [1, 2, 3])

    def test_parallel_matches_serial(self):
        """Тест что параллельное выполнение дает те же результаты"""
        serial = self.run_plan()
        parallel_store = Path(self.tmp.name) / "parallel.jsonl"
        parallel = execute(
            self.plan.runs, parallel_store, self.split, self.plan.augmentation, workers=2
        )
        self.assertEqual(_without_timing(parallel.records), _without_timing(serial.records))

    def test_empty_plan(self):
        """Тест что пустой план отклоняется"""
        with self.assertRaises(StoreException):
            execute([], self.store, self.split, self.plan.augmentation)

    def test_unwritable_store(self):
        """Тест недоступного на запись хранилища"""
        blocker = Path(self.tmp.name) / "file"
        blocker.write_text("x", encoding="utf-8")
        with self.assertRaises(StoreException):
            execute(
                self.plan.runs, blocker / "results.jsonl", self.split, self.plan.augmentation
            )


class ResultStoreTest(SimpleTestCase):
    """Тесты для чтения хранилища результатов"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "results.jsonl"
        self.plan = reference_plan(("resnet50",), n_hyperparams=1)
        self.records = reference_records(self.plan)[:4]

    def tearDown(self):
        self.tmp.cleanup()

    def test_read_written_records(self):
        """Тест чтения записанных строк"""
        write_store(self.records, self.path)
        self.assertEqual(ResultStore(self.path).read(), self.records)

    def test_hand_written_record(self):
        """Тест разбора записи, написанной вручную"""
        line = {
            "classifier": "resnet50",
            "hyperparams": "sgd-20-lr0.01-b64",
            "optimizer": "sgd",
            "epochs": 20,
            "learning_rate": 0.01,
            "batch_size": 64,
            "vector": "100010001",
            "seed": 1,
            "status": "done",
            "test_accuracy": 87.2,
            "test_loss": 0.344,
            "test_loss_scaled": 34.4,
        }
        self.path.write_text(json.dumps(line) + "\n", encoding="utf-8")
        (record,) = ResultStore(self.path).read()
        self.assertEqual(record.test_accuracy, 87.2)
        self.assertEqual(record.test_loss_scaled, 34.4)
        self.assertEqual(record.metric("loss"), 0.344)

    def test_parse_error_has_line_number(self):
        """Тест что ошибка разбора указывает номер строки"""
        write_store(self.records[:2], self.path)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write("{not json}\n")
        with self.assertRaises(ResultParseException) as ctx:
            ResultStore(self.path).read()
        self.assertEqual(ctx.exception.line_number, 3)

    def test_out_of_range_accuracy(self):
        """Тест что точность вне [0, 100] отклоняется"""
        document = self.records[0].as_dict()
        document["test_accuracy"] = 101.0
        self.path.write_text(json.dumps(document) + "\n", encoding="utf-8")
        with self.assertRaises(ResultParseException):
            ResultStore(self.path).read()

    def test_duplicate_triple(self):
        """Тест что повтор тройки является ошибкой"""
        write_store(self.records + self.records[:1], self.path)
        with self.assertRaises(DuplicateRunException) as ctx:
            ResultStore(self.path).read()
        self.assertEqual(ctx.exception.line_number, 5)

    def test_torn_last_line(self):
        """Тест что оборванная последняя строка пропускается и обрезается"""
        write_store(self.records, self.path)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write('{"classifier": "resn')
        store = ResultStore(self.path)
        self.assertEqual(len(store.read()), 4)
        store.repair()
        self.assertTrue(self.path.read_text(encoding="utf-8").endswith("}\n"))
        self.assertEqual(len(store.read()), 4)

    def test_complete_last_line_without_newline(self):
        """Тест что целая последняя строка без перевода строки сохраняется"""
        write_store(self.records, self.path)
        self.path.write_text(self.path.read_text(encoding="utf-8").rstrip("\n"), encoding="utf-8")
        store = ResultStore(self.path)
        self.assertEqual(len(store.read()), 4)
        store.repair()
        self.assertEqual(len(self.path.read_text(encoding="utf-8").splitlines()), 4)
        self.assertEqual(len(store.read()), 4)

    def test_load_results_follows_plan_order(self):
        """Тест что таблица упорядочена по плану"""
        write_store(self.records[::-1], self.path)
        table = load_results(self.path, self.plan.runs)
        self.assertEqual([r.key for r in table], [run.key for run in self.plan.runs[:4]])

    def test_load_missing_store(self):
        """Тест отсутствующего хранилища"""
        with self.assertRaises(StoreException):
            load_results(self.path)

    def test_export_csv(self):
        """Тест выгрузки в CSV с колонками хранилища"""
        write_store(self.records, self.path)
        out = export_csv(load_results(self.path), Path(self.tmp.name) / "results.csv")
        with open(out, encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(tuple(rows[0].keys()), RECORD_FIELDS)
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0]["status"], "done")
