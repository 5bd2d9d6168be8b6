import numpy as np
from django.test import SimpleTestCase

from ..exceptions import ValidationException
from ..models import AugmentationParams, AugVector
from ..services.augment import (
    KERNELS,
    apply_one,
    apply_vector,
    augment_batch,
    downscale,
    equalize,
    gaussian_kernel_1d,
    invert,
    rotate90,
    transpose,
)
from .fixtures import make_image_set


def equalize_reference(image):
    """Эквализация на целых числах; половина округляется вверх"""
    counts = {}
    for value in image.ravel().tolist():
        counts[value] = counts.get(value, 0) + 1
    total = image.size
    cdf_min = counts[min(counts)]
    if cdf_min == total:
        return image.copy()
    lut, running = {}, 0
    for value in sorted(counts):
        running += counts[value]
        numerator = 2 * (running - cdf_min) * 255 + (total - cdf_min)
        lut[value] = numerator // (2 * (total - cdf_min))
    return np.array([[lut[v] for v in row] for row in image.tolist()], dtype=np.uint8)


class AugVectorTest(SimpleTestCase):
    """Тесты для вектора аугментаций"""

    def test_string_form(self):
        """Тест текстовой формы: индекс 0 слева"""
        vector = AugVector.from_indices([0, 4, 8])
        self.assertEqual(vector.to_string(), "100010001")
        self.assertEqual(AugVector.from_string("100010001"), vector)

    def test_label_form(self):
        """Тест записи с нумерацией аугментаций с единицы"""
        vector = AugVector.from_labels("a1,a5,a6,a8,a9")
        self.assertEqual(vector.active_ids, (0, 4, 5, 7, 8))
        self.assertEqual(vector.to_labels(), "a1,a5,a6,a8,a9")

    def test_invalid_vector(self):
        """Тест отклонения неверной длины и символов"""
        with self.assertRaises(ValidationException):
            AugVector.from_string("10101")
        with self.assertRaises(ValidationException):
            AugVector.from_string("10101010x")
        with self.assertRaises(ValidationException):
            AugVector.from_indices([9])


class KernelTest(SimpleTestCase):
    """Тесты для отдельных ядер"""

    def setUp(self):
        self.image = make_image_set(1, classes=[3], seed=2).images[0]
        self.always = AugmentationParams().with_probability(1.0)
        self.rng = np.random.default_rng(0)

    def test_invert_involutive(self):
        """Тест что двойная инверсия возвращает исходное изображение"""
        np.testing.assert_array_equal(invert(invert(self.image)), self.image)
        self.assertEqual(int(invert(self.image)[0, 0]), 255 - int(self.image[0, 0]))

    def test_transpose_involutive(self):
        """Тест что двойное транспонирование возвращает исходное изображение"""
        np.testing.assert_array_equal(transpose(transpose(self.image)), self.image)

    def test_four_quarter_turns(self):
        """Тест что четыре поворота на 90 градусов дают тождество"""
        image = self.image
        for _ in range(4):
            image = rotate90(image, 1)
        np.testing.assert_array_equal(image, self.image)
        np.testing.assert_array_equal(rotate90(self.image, 2), self.image[::-1, ::-1])

    def test_equalize_spreads_histogram(self):
        """Тест что эквализация растягивает диапазон до [0, 255]"""
        image = np.tile(np.arange(50, 78, dtype=np.uint8), (28, 1))
        result = equalize(image)
        self.assertEqual(int(result.min()), 0)
        self.assertEqual(int(result.max()), 255)

    def test_equalize_constant_image(self):
        """Тест что постоянное изображение не меняется"""
        image = np.full((28, 28), 77, dtype=np.uint8)
        np.testing.assert_array_equal(equalize(image), image)

    def test_downscale_blocks(self):
        """Тест что Downscale дает блоки 4x4 при коэффициенте 0.25"""
        result = downscale(self.image, AugmentationParams())
        self.assertEqual(result.shape, (28, 28))
        np.testing.assert_array_equal(result[:4, :4], np.full((4, 4), result[0, 0]))

    def test_equalize_known_image(self):
        """Тест эквализации изображения из трех уровней яркости"""
        image = np.zeros((28, 28), dtype=np.uint8)
        image[14:, :14] = 100
        image[14:, 14:] = 200
        result = equalize(image)
        np.testing.assert_array_equal(result[:14], 0)
        # 196 * 255 / 392 = 127.5
        np.testing.assert_array_equal(result[14:, :14], 128)
        np.testing.assert_array_equal(result[14:, 14:], 255)

    def test_equalize_matches_cumulative_histogram(self):
        """Тест эквализации попиксельно против расчета на целых числах"""
        rng = np.random.default_rng(5)
        for _ in range(200):
            low, high = sorted(rng.integers(0, 256, size=2))
            image = rng.integers(low, high + 1, size=(28, 28)).astype(np.uint8)
            np.testing.assert_array_equal(equalize(image), equalize_reference(image))

    def test_gauss_noise_zero_mean(self):
        """Тест что шум имеет нулевое среднее и дисперсию в заданных пределах"""
        image = np.full((28, 28), 128, dtype=np.uint8)
        low, high = self.always.gauss_noise_var_limit
        diffs = []
        for _ in range(50):
            diff = KERNELS[4](image, self.always, self.rng).astype(np.float64) - 128.0
            self.assertGreater(diff.var(), 0.8 * low)
            self.assertLess(diff.var(), 1.2 * high)
            diffs.append(diff)
        self.assertLess(abs(np.mean(diffs)), 0.2)

    def test_downscale_distinct_values(self):
        """Тест что после Downscale не больше 7x7 различных значений"""
        rng = np.random.default_rng(9)
        for _ in range(20):
            image = rng.integers(0, 256, size=(28, 28)).astype(np.uint8)
            result = downscale(image, AugmentationParams())
            self.assertLessEqual(len(np.unique(result)), 49)
            blocks = result.reshape(7, 4, 7, 4)
            np.testing.assert_array_equal(blocks, blocks[:, :1, :, :1].repeat(4, 1).repeat(4, 3))

    def test_gaussian_kernel_normalized(self):
        """Тест что ядро Гаусса симметрично и нормировано"""
        for size in (3, 5, 7):
            kernel = gaussian_kernel_1d(size)
            self.assertAlmostEqual(kernel.sum(), 1.0, places=12)
            np.testing.assert_allclose(kernel, kernel[::-1])

    def test_blur_keeps_constant_image(self):
        """Тест что размытие постоянного изображения его не меняет"""
        image = np.full((28, 28), 120, dtype=np.uint8)
        for aug_id in (1, 5):
            result = KERNELS[aug_id](image, self.always, self.rng)
            np.testing.assert_array_equal(result, image)

    def test_probability_zero_skips(self):
        """Тест что при p=0 изображение возвращается без изменений"""
        never = AugmentationParams().with_probability(0.0)
        for aug_id in KERNELS:
            self.assertIs(apply_one(self.image, aug_id, never, self.rng), self.image)


class ApplyVectorTest(SimpleTestCase):
    """Тесты для применения вектора аугментаций"""

    def setUp(self):
        self.images = make_image_set(2, seed=4).images
        self.params = AugmentationParams()

    def test_zero_vector_identity(self):
        """Тест что нулевой вектор не меняет изображения"""
        rng = np.random.default_rng(1)
        for image in self.images:
            np.testing.assert_array_equal(
                apply_vector(image, AugVector.zero(), self.params, rng), image
            )
        self.assertIs(
            augment_batch(self.images, AugVector.zero(), self.params, rng), self.images
        )

    def test_range_and_shape(self):
        """Тест диапазона и формы на случайных векторах"""
        rng = np.random.default_rng(2)
        for trial in range(1000):
            vector = AugVector(tuple(rng.random(9) < 0.5))
            image = self.images[trial % len(self.images)]
            result = apply_vector(image, vector, self.params, rng)
            self.assertEqual(result.shape, (28, 28))
            self.assertEqual(result.dtype, np.uint8)

    def test_same_seed_same_output(self):
        """Тест детерминизма при одинаковом сиде"""
        vector = AugVector.from_string("111111111")
        first = augment_batch(self.images, vector, self.params, np.random.default_rng(5))
        second = augment_batch(self.images, vector, self.params, np.random.default_rng(5))
        np.testing.assert_array_equal(first, second)

    def test_all_kernels_keep_uint8(self):
        """Тест что каждое ядро возвращает 28x28 uint8"""
        always = self.params.with_probability(1.0)
        rng = np.random.default_rng(3)
        for aug_id in range(9):
            result = apply_one(self.images[0], aug_id, always, rng)
            self.assertEqual(result.shape, (28, 28))
            self.assertEqual(result.dtype, np.uint8)

    def test_params_from_dict(self):
        """Тест частичного переопределения вероятностей по имени"""
        params = AugmentationParams.from_dict({"probabilities": {"InvertImg": 1.0}})
        self.assertEqual(params.probability(6), 1.0)
        self.assertEqual(params.probability(7), 0.8)
        with self.assertRaises(ValidationException):
            AugmentationParams.from_dict({"probabilities": {"Sharpen": 1.0}})
