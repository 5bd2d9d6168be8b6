"""
Выполнение сетки запусков с дозаписью результатов в JSON lines.

Хранилище только дополняется: каждая запись занимает одну строку и сбрасывается
на диск сразу после завершения запуска, поэтому сбой теряет не больше одной
записи. При повторном запуске уже записанные тройки пропускаются.
"""

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..constants import (
    LOG_FORMATS,
    LOSS_SCALE,
    RECORD_KEY_SEPARATOR,
    RUN_STATUS_DONE,
    RUN_STATUS_FAILED,
)
from ..exceptions import (
    AugSenseException,
    DuplicateRunException,
    ResultParseException,
    StoreException,
)
from ..models import (
    RECORD_FIELDS,
    AugmentationParams,
    DataSplit,
    ResultTable,
    RunRecord,
    RunSpec,
)
from ..utils import timing_decorator
from .classifiers import save_model
from .training import evaluate, train

logger = logging.getLogger(__name__)

RecordCallback = Callable[[int, int, RunRecord], None]


def _optional(value: Optional[float]) -> Optional[float]:
    if value is None or not np.isfinite(value):
        return None
    return float(value)


def model_filename(run: RunSpec) -> str:
    return RECORD_KEY_SEPARATOR.join(run.key).replace("/", "_") + ".bin"


def run_one(
    run: RunSpec,
    split: DataSplit,
    params: AugmentationParams,
    model_dir: Optional[str] = None,
) -> RunRecord:
    """
    Обучает и оценивает один запуск. Ошибка обучения или сохранения модели
    превращается в запись со статусом failed
    """
    start = time.perf_counter()
    base = {
        "classifier": run.classifier.id,
        "hyperparams": run.hyperparams.descriptor,
        "optimizer": run.hyperparams.optimizer,
        "epochs": run.hyperparams.epochs,
        "learning_rate": run.hyperparams.learning_rate,
        "batch_size": run.hyperparams.batch_size,
        "vector": run.vector.to_string(),
        "seed": run.seed,
    }
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            result = train(
                run.classifier, split, run.vector, params, run.hyperparams, run.seed
            )
            test = evaluate(result.classifier, split.test)
            valid = evaluate(result.classifier, split.valid) if len(split.valid) else None
        if model_dir:
            save_model(
                result.classifier,
                Path(model_dir) / model_filename(run),
                {**base, "history": [s.train_loss for s in result.history]},
            )
    except Exception as e:
        message = e.message if isinstance(e, AugSenseException) else str(e)
        logger.warning(f"Run {run.key} failed: {message}")
        return RunRecord(
            **base,
            status=RUN_STATUS_FAILED,
            seconds=round(time.perf_counter() - start, 3),
            error=message,
        )

    return RunRecord(
        **base,
        status=RUN_STATUS_DONE,
        test_accuracy=test.accuracy,
        test_loss=test.loss,
        test_loss_scaled=test.loss * LOSS_SCALE,
        valid_accuracy=valid.accuracy if valid else None,
        valid_loss=_optional(valid.loss) if valid else None,
        seconds=round(time.perf_counter() - start, 3),
    )


def _parse_record(line: str, line_number: int) -> RunRecord:
    from ..serializers import RunRecordSerializer

    try:
        document = json.loads(line)
    except json.JSONDecodeError as e:
        raise ResultParseException(line_number, f"неверный JSON ({e.msg})")
    if not isinstance(document, dict):
        raise ResultParseException(line_number, "ожидался объект")

    serializer = RunRecordSerializer(data=document)
    if not serializer.is_valid():
        raise ResultParseException(line_number, str(serializer.errors))
    try:
        return RunRecord.from_dict(dict(serializer.validated_data))
    except AugSenseException as e:
        raise ResultParseException(line_number, e.message)


class ResultStore:
    """
    Файл JSON lines с записями запусков
    """

    def __init__(self, path):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def read(self) -> List[RunRecord]:
        """
        Читает записи в порядке файла. Последняя строка без перевода строки, которую
        не удается разобрать, считается оборванной и пропускается с предупреждением; повтор тройки является ошибкой.
        """
        try:
            text = self.path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return []
        except OSError as e:
            raise StoreException(f"Не удалось прочитать {self.path}: {e}")

        lines = text.split("\n")
        torn = lines.pop() if lines else ""
        records: List[RunRecord] = []
        seen: Dict[Tuple[str, str, str], int] = {}
        for line_number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            record = _parse_record(line, line_number)
            if record.key in seen:
                raise DuplicateRunException(line_number, record.key)
            seen[record.key] = line_number
            records.append(record)

        if torn.strip():
            record = self._parse_tail(torn, len(lines) + 1)
            if record is None:
                logger.warning(
                    f"Ignoring incomplete last line {len(lines) + 1} of {self.path}"
                )
            elif record.key in seen:
                raise DuplicateRunException(len(lines) + 1, record.key)
            else:
                records.append(record)
        return records

    @staticmethod
    def _parse_tail(line: str, line_number: int) -> Optional[RunRecord]:
        try:
            return _parse_record(line, line_number)
        except ResultParseException:
            return None

    def repair(self):
        """Готовит файл к дозаписи: завершает целую последнюю строку или обрезает оборванную"""
        if not self.path.exists():
            return
        data = self.path.read_bytes()
        if not data or data.endswith(b"\n"):
            return
        cut = data.rfind(b"\n") + 1
        tail = data[cut:].decode("utf-8", errors="replace")
        if self._parse_tail(tail, data.count(b"\n") + 1) is not None:
            with open(self.path, "ab") as handle:
                handle.write(b"\n")
            return
        with open(self.path, "r+b") as handle:
            handle.truncate(cut)
        logger.warning(f"Truncated incomplete record at end of {self.path}")

    def append(self, record: RunRecord):
        line = json.dumps(record.as_dict(), ensure_ascii=False, allow_nan=False)
        try:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())
        except OSError as e:
            raise StoreException(f"Не удалось записать в {self.path}: {e}")

    def ensure_writable(self):
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8"):
                pass
        except OSError as e:
            raise StoreException(f"Хранилище {self.path} недоступно для записи: {e}")


def _order_by_runs(records: Sequence[RunRecord], runs: Sequence[RunSpec]) -> List[RunRecord]:
    by_key = {record.key: record for record in records}
    return [by_key[run.key] for run in runs if run.key in by_key]


def load_results(path, runs: Optional[Sequence[RunSpec]] = None) -> ResultTable:
    """
    Загружает хранилище. С `runs` записи фильтруются и упорядочиваются по плану
    """
    store = ResultStore(path)
    if not store.exists():
        raise StoreException(f"Хранилище результатов {path} не найдено")
    records = store.read()
    if runs is not None:
        records = _order_by_runs(records, runs)
    return ResultTable(records)


def _log_record(position: int, total: int, record: RunRecord):
    fields = {
        "index": position,
        "total": total,
        "classifier": record.classifier,
        "hyperparams": record.hyperparams,
        "vector": record.vector,
    }
    if record.is_done:
        logger.info(
            LOG_FORMATS["RUN_DONE"].format(
                **fields,
                accuracy=record.test_accuracy,
                loss=record.test_loss,
                seconds=record.seconds,
            )
        )
    else:
        logger.warning(LOG_FORMATS["RUN_FAILED"].format(**fields, error=record.error))


@timing_decorator
def execute(
    runs: Sequence[RunSpec],
    store_path,
    split: DataSplit,
    params: AugmentationParams,
    workers: int = 1,
    on_record: Optional[RecordCallback] = None,
    model_dir=None,
) -> ResultTable:
    """
    Выполняет все запуски плана, которых еще нет в хранилище.
    Возвращает таблицу в порядке плана.
    """
    if not runs:
        raise StoreException("План пуст")

    store = ResultStore(store_path)
    store.ensure_writable()
    store.repair()
    existing = {record.key: record for record in store.read()}
    pending = [run for run in runs if run.key not in existing]
    skipped = len(runs) - len(pending)
    logger.info(f"{len(pending)} runs pending, {skipped} already in {store.path}")

    if model_dir:
        Path(model_dir).mkdir(parents=True, exist_ok=True)
        model_dir = str(model_dir)

    total = len(pending)

    def collect(position: int, record: RunRecord):
        store.append(record)
        existing[record.key] = record
        _log_record(position, total, record)
        if on_record:
            on_record(position, total, record)

    if workers > 1 and total > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_one, run, split, params, model_dir) for run in pending
            ]
            for position, future in enumerate(as_completed(futures), start=1):
                collect(position, future.result())
    else:
        for position, run in enumerate(pending, start=1):
            logger.debug(
                LOG_FORMATS["RUN_START"].format(
                    index=position,
                    total=total,
                    classifier=run.classifier.id,
                    hyperparams=run.hyperparams.descriptor,
                    vector=run.vector,
                )
            )
            collect(position, run_one(run, split, params, model_dir))

    return ResultTable(
        [existing[run.key] for run in runs], executed=total, skipped=skipped
    )


def export_csv(table: ResultTable, path) -> Path:
    """CSV с теми же колонками, что и хранилище"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=RECORD_FIELDS, lineterminator="\n")
        writer.writeheader()
        for record in table:
            writer.writerow(
                {k: "" if v is None else v for k, v in record.as_dict().items()}
            )
    return path
