import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..constants import (
    GZIP_PREFIX,
    IDX_IMAGE_MAGIC,
    IDX_LABEL_MAGIC,
    IMAGE_SIZE,
    N_CLASSES,
    TRAIN_SHARE,
)
from ..exceptions import (
    DatasetConsistencyException,
    DatasetFormatException,
    DatasetIOException,
    ValidationException,
)
from ..models import DataSplit, ImageSet

logger = logging.getLogger(__name__)


def _read_payload(path) -> bytes:
    """Читает файл целиком; gzip распознается по сигнатуре 0x1F 0x8B"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DatasetIOException(f"Не удалось прочитать {path}: {e}")

    if raw[:2] == GZIP_PREFIX:
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise DatasetIOException(f"Поврежденный gzip {path}: {e}")
    return raw


def _parse_idx(data: bytes, expected_magic: int, source) -> np.ndarray:
    """
    Разбирает IDX: 4-байтовая big-endian сигнатура, затем big-endian 32-битные
    размерности, затем данные по строкам (unsigned byte)
    """
    if len(data) < 4:
        raise DatasetIOException(f"Файл {source} обрезан: нет заголовка")

    (magic,) = struct.unpack(">I", data[:4])
    if magic != expected_magic:
        raise DatasetFormatException(
            f"Неверная сигнатура {source}: 0x{magic:08X}, ожидалась 0x{expected_magic:08X}"
        )

    ndim = magic & 0xFF
    header_size = 4 + 4 * ndim
    if len(data) < header_size:
        raise DatasetIOException(f"Файл {source} обрезан: неполный заголовок")
    dims = struct.unpack(f">{ndim}I", data[4:header_size])

    expected = int(np.prod(dims, dtype=np.int64))
    payload = data[header_size:]
    if len(payload) < expected:
        raise DatasetIOException(
            f"Файл {source} обрезан: {len(payload)} байт данных из {expected}"
        )
    if expected == 0:
        return np.zeros(dims, dtype=np.uint8)
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(dims)


def load_idx(images_path, labels_path) -> ImageSet:
    """
    Загружает пару IDX файлов Fashion-MNIST (сырых или сжатых gzip)
    """
    images = _parse_idx(_read_payload(images_path), IDX_IMAGE_MAGIC, images_path)
    labels = _parse_idx(_read_payload(labels_path), IDX_LABEL_MAGIC, labels_path)

    if images.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise DatasetFormatException(
            f"Ожидались изображения {IMAGE_SIZE}x{IMAGE_SIZE}, в {images_path} {images.shape[1:]}"
        )
    if images.shape[0] != labels.shape[0]:
        raise DatasetConsistencyException(
            f"{images.shape[0]} изображений, но {labels.shape[0]} меток"
        )
    if labels.size and labels.max() >= N_CLASSES:
        raise DatasetFormatException(f"Метка вне диапазона [0, {N_CLASSES - 1}]")

    logger.info(f"Loaded {images.shape[0]} images from {images_path}")
    return ImageSet(images.copy(), labels.copy())


def write_idx(image_set: ImageSet, images_path, labels_path, compress: bool = False):
    """Записывает изображения и метки в формате IDX"""
    n = len(image_set)
    image_bytes = (
        struct.pack(">IIII", IDX_IMAGE_MAGIC, n, IMAGE_SIZE, IMAGE_SIZE)
        + image_set.images.tobytes()
    )
    label_bytes = struct.pack(">II", IDX_LABEL_MAGIC, n) + image_set.labels.tobytes()

    for path, payload in ((images_path, image_bytes), (labels_path, label_bytes)):
        if compress:
            payload = gzip.compress(payload, mtime=0)
        Path(path).write_bytes(payload)


def split(
    train_pool: ImageSet, seed: int, test: Optional[ImageSet] = None
) -> DataSplit:
    """
    Перемешивает пул по сиду и делит 85% / 15% на train / valid
    (51000 / 9000 для полного Fashion-MNIST). Тестовая выборка не меняется.
    """
    n = len(train_pool)
    if n < 2:
        raise ValidationException("Для разбиения нужно хотя бы 2 изображения")

    numerator, denominator = TRAIN_SHARE
    n_train = (n * numerator + denominator // 2) // denominator
    n_train = min(max(n_train, 1), n - 1)

    order = np.random.default_rng(seed).permutation(n)
    return DataSplit(
        train=train_pool.subset(np.sort(order[:n_train])),
        valid=train_pool.subset(np.sort(order[n_train:])),
        test=test if test is not None else ImageSet.empty(),
    )


def stratified_quotas(counts: np.ndarray, n: int) -> np.ndarray:
    """
    Делит n поровну между классами; остаток получают классы с меньшим номером.
    Если класс меньше своей квоты, излишек раздается следующим классам по кругу.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if n > counts.sum():
        raise ValidationException(f"Нельзя выбрать {n} из {int(counts.sum())}")

    quotas = np.zeros_like(counts)
    remaining = n
    while remaining > 0:
        open_classes = np.flatnonzero(quotas < counts)
        share, extra = divmod(remaining, len(open_classes))
        for position, cls in enumerate(open_classes):
            wanted = share + (1 if position < extra else 0)
            take = min(wanted, counts[cls] - quotas[cls])
            quotas[cls] += take
            remaining -= take
    return quotas


def _stratified_take(image_set: ImageSet, n: int, rng: np.random.Generator) -> ImageSet:
    if n >= len(image_set):
        return image_set
    quotas = stratified_quotas(image_set.class_counts(), n)
    chosen = []
    for cls in range(N_CLASSES):
        if quotas[cls] == 0:
            continue
        members = np.flatnonzero(image_set.labels == cls)
        chosen.append(rng.permutation(members)[: quotas[cls]])
    return image_set.subset(np.sort(np.concatenate(chosen)))


def subsample(data_split: DataSplit, n_train: int, seed: int) -> DataSplit:
    """
    Детерминированная стратифицированная подвыборка для запусков на одной машине.
    valid и test уменьшаются в той же пропорции, что и train.
    """
    full = len(data_split.train)
    if n_train <= 0:
        raise ValidationException("Размер подвыборки должен быть положительным")
    if n_train > full:
        raise ValidationException(
            f"Размер подвыборки {n_train} больше обучающей выборки {full}"
        )
    if n_train == full:
        return data_split

    ratio = n_train / full
    rng = np.random.default_rng(seed)
    result = DataSplit(
        train=_stratified_take(data_split.train, n_train, rng),
        valid=_stratified_take(
            data_split.valid, max(1, round(len(data_split.valid) * ratio)), rng
        ),
        test=_stratified_take(
            data_split.test, max(1, round(len(data_split.test) * ratio)), rng
        ),
    )
    logger.info(f"Subsampled split to sizes {result.sizes()}")
    return result


def load_fashion_mnist(
    train_images,
    train_labels,
    test_images,
    test_labels,
    seed: int,
    n_train: Optional[int] = None,
) -> Tuple[DataSplit, dict]:
    """
    Загружает обучающие и тестовые файлы, делит и при необходимости уменьшает выборку.
    Возвращает разбиение и описание для манифеста.
    """
    pool = load_idx(train_images, train_labels)
    test = load_idx(test_images, test_labels)
    data_split = split(pool, seed, test=test)
    if n_train:
        data_split = subsample(data_split, n_train, seed)

    manifest = {
        "seed": seed,
        "n_train": len(data_split.train),
        "n_valid": len(data_split.valid),
        "n_test": len(data_split.test),
    }
    return data_split, manifest
