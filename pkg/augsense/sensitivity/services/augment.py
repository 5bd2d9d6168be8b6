"""
Девять ядер аугментаций для 28x28 изображений в оттенках серого.

Каждое ядро имеет сигнатуру (image, params, rng) -> image и не имеет общего
состояния: вся случайность берется из переданного генератора.
"""

import logging
from typing import Callable, Dict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..constants import PIXEL_MAX
from ..models import AugmentationParams, AugVector

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray, AugmentationParams, np.random.Generator], np.ndarray]


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, PIXEL_MAX).astype(np.uint8)


def _filter_separable(image: np.ndarray, kernel_1d: np.ndarray) -> np.ndarray:
    """Свертка по строкам и столбцам с отражением на границе"""
    radius = len(kernel_1d) // 2
    padded = np.pad(image.astype(np.float64), radius, mode="reflect")
    rows = sliding_window_view(padded, len(kernel_1d), axis=1) @ kernel_1d
    return sliding_window_view(rows, len(kernel_1d), axis=0) @ kernel_1d


def gaussian_kernel_1d(size: int) -> np.ndarray:
    # sigma по размеру ядра, как в OpenCV при sigma=0
    sigma = 0.3 * ((size - 1) * 0.5 - 1) + 0.8
    offsets = np.arange(size, dtype=np.float64) - size // 2
    weights = np.exp(-(offsets**2) / (2 * sigma**2))
    return weights / weights.sum()


def _resample(image: np.ndarray, source_rows, source_cols) -> np.ndarray:
    """Ближайший сосед; точки за пределами кадра заполняются нулем"""
    h, w = image.shape
    rows = np.floor(source_rows + 0.5).astype(np.int64)
    cols = np.floor(source_cols + 0.5).astype(np.int64)
    inside = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    out = np.zeros_like(image)
    out[inside] = image[rows[inside], cols[inside]]
    return out


def transpose(image, params=None, rng=None):
    return np.ascontiguousarray(image.T)


def blur(image, params, rng):
    size = int(rng.choice(params.blur_kernel_sizes))
    box = np.full(size, 1.0 / size)
    return _to_uint8(_filter_separable(image, box))


def downscale(image, params, rng=None):
    """Уменьшение ближайшим соседом и обратное увеличение до исходного кадра"""
    h, w = image.shape
    low_h = max(1, int(round(h * params.downscale_factor)))
    low_w = max(1, int(round(w * params.downscale_factor)))
    low = image[np.ix_((np.arange(low_h) * h) // low_h, (np.arange(low_w) * w) // low_w)]
    return np.ascontiguousarray(
        low[np.ix_((np.arange(h) * low_h) // h, (np.arange(w) * low_w) // w)]
    )


def equalize(image, params=None, rng=None):
    """Эквализация гистограммы через кумулятивное распределение"""
    histogram = np.bincount(image.ravel(), minlength=PIXEL_MAX + 1)
    cdf = np.cumsum(histogram)
    cdf_min = cdf[np.flatnonzero(histogram)[0]]
    total = image.size
    if total == cdf_min:
        return image.copy()
    lut = np.floor((cdf - cdf_min) * PIXEL_MAX / (total - cdf_min) + 0.5)
    lut = np.clip(lut, 0, PIXEL_MAX).astype(np.uint8)
    return lut[image]


def gauss_noise(image, params, rng):
    low, high = params.gauss_noise_var_limit
    sigma = np.sqrt(rng.uniform(low, high))
    noise = rng.normal(0.0, sigma, size=image.shape)
    return _to_uint8(image.astype(np.float64) + noise)


def gaussian_blur(image, params, rng):
    size = int(rng.choice(params.gaussian_blur_kernel_sizes))
    return _to_uint8(_filter_separable(image, gaussian_kernel_1d(size)))


def invert(image, params=None, rng=None):
    return (PIXEL_MAX - image).astype(np.uint8)


def shift_scale_rotate(image, params, rng):
    h, w = image.shape
    dx = rng.uniform(-params.shift_limit, params.shift_limit) * w
    dy = rng.uniform(-params.shift_limit, params.shift_limit) * h
    scale = 1.0 + rng.uniform(-params.scale_limit, params.scale_limit)
    angle = np.deg2rad(rng.uniform(-params.rotate_limit, params.rotate_limit))

    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.indices((h, w), dtype=np.float64)
    # обратное отображение: выходной пиксель -> точка исходного изображения
    y = (rows - cy - dy) / scale
    x = (cols - cx - dx) / scale
    cos, sin = np.cos(angle), np.sin(angle)
    source_rows = cos * y - sin * x + cy
    source_cols = sin * y + cos * x + cx
    return _resample(image, source_rows, source_cols)


def rotate90(image: np.ndarray, k: int) -> np.ndarray:
    return np.ascontiguousarray(np.rot90(image, k % 4))


def random_rotate90(image, params, rng):
    return rotate90(image, int(rng.integers(0, 4)))


KERNELS: Dict[int, Kernel] = {
    0: transpose,
    1: blur,
    2: downscale,
    3: equalize,
    4: gauss_noise,
    5: gaussian_blur,
    6: invert,
    7: shift_scale_rotate,
    8: random_rotate90,
}


def apply_one(
    image: np.ndarray,
    aug_id: int,
    params: AugmentationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Применяет аугментацию с вероятностью p; иначе возвращает вход без изменений
    """
    if rng.random() >= params.probability(aug_id):
        return image
    return KERNELS[aug_id](image, params, rng)


def apply_vector(
    image: np.ndarray,
    vector: AugVector,
    params: AugmentationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Применяет выбранные аугментации по возрастанию индекса, передавая результат дальше
    """
    for aug_id in vector.active_ids:
        image = apply_one(image, aug_id, params, rng)
    return image


def augment_batch(
    images: np.ndarray,
    vector: AugVector,
    params: AugmentationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Аугментирует каждое изображение батча со свежей случайностью"""
    if vector.is_zero:
        return images
    return np.stack([apply_vector(image, vector, params, rng) for image in images])
