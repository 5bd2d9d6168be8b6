APP_VERSION = "0.1.0"

IMAGE_SIZE = 28
PIXEL_MAX = 255
N_CLASSES = 10

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
GZIP_PREFIX = b"\x1f\x8b"

# 51000 / 9000 из 60000
TRAIN_SHARE = (51, 60)
DEFAULT_SUBSAMPLE_SIZE = 2000
DEFAULT_SEED = 2022

AUGMENTATION_NAMES = (
    "Transpose",
    "Blur",
    "Downscale",
    "Equalize",
    "GaussNoise",
    "GaussianBlur",
    "InvertImg",
    "ShiftScaleRotate",
    "RandomRotate90",
)
N_AUGMENTATIONS = len(AUGMENTATION_NAMES)
MAX_DISTINCT_VECTORS = 2**N_AUGMENTATIONS - 1

DEFAULT_PROBABILITIES = (0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.8, 0.5)
DEFAULT_BLUR_KERNEL_SIZES = (3, 5, 7)
DEFAULT_GAUSSIAN_BLUR_KERNEL_SIZES = (3, 5, 7)
DEFAULT_DOWNSCALE_FACTOR = 0.25
DEFAULT_GAUSS_NOISE_VAR_LIMIT = (10.0, 50.0)
DEFAULT_SHIFT_LIMIT = 0.0625
DEFAULT_SCALE_LIMIT = 0.1
DEFAULT_ROTATE_LIMIT = 15.0

OPTIMIZERS = ("sgd", "adam")
OPTIMIZER_LABELS = {"sgd": "SGD", "adam": "Adam"}
DEFAULT_LEARNING_RATES = {"sgd": 0.01, "adam": 0.001}
DEFAULT_BATCH_SIZE = 64
DEFAULT_EPOCH_SETTINGS = (20, 15)
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

ARCHITECTURES = ("linear-softmax", "mlp")
MLP_HIDDEN_UNITS = 128
LOSS_SCALE = 100.0

DEFAULT_VECTOR_COUNT = 28
VECTOR_BIT_PROBABILITY = 0.5

RUN_STATUS_DONE = "done"
RUN_STATUS_FAILED = "failed"
RUN_STATUSES = (RUN_STATUS_DONE, RUN_STATUS_FAILED)

METRICS = ("accuracy", "loss")
DEFAULT_METRIC = "accuracy"
RELIABILITY_MODES = ("table", "equation")
DEFAULT_RELIABILITY_MODE = "table"
SENSITIVITY_THRESHOLD = 0.2
TOP_N_RELIABLE = 3

MIN_RECOMMENDED_SAMPLES = 10
RANK_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-6

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2

PLAN_FILENAME = "plan.json"
STORE_FILENAME = "results.jsonl"
FITS_FILENAME = "fits.csv"
TENSOR_FILENAME = "tensor_{metric}.csv"
METRICS_FILENAME = "metrics.csv"
ANALYSIS_MANIFEST_FILENAME = "analysis.json"
REPORT_FILENAME = "report.md"
INTERCEPTS_FILENAME = "intercepts.csv"
SERIES_FILENAME = "coefficients_{metric}_{classifier}.csv"
RECORD_KEY_SEPARATOR = "__"
SERIES_SEPARATOR = RECORD_KEY_SEPARATOR

ERROR_MESSAGES = {
    "VALIDATION_ERROR": "Ошибка валидации параметров",
    "CONFIG_ERROR": "Ошибка конфигурации",
    "INTERNAL_ERROR": "Внутренняя ошибка пайплайна",
    "IDX_FORMAT_ERROR": "Неверный формат IDX файла",
    "IDX_CONSISTENCY_ERROR": "Файлы изображений и меток не согласованы",
    "IDX_IO_ERROR": "Ошибка чтения IDX файла",
    "TRAINING_DIVERGED": "Обучение разошлось",
    "NORMALIZATION_ERROR": "Нормализация невозможна для ряда с нулевой дисперсией",
    "INCOMPLETE_GRID": "Результаты покрывают сетку не полностью",
    "METRICS_ERROR": "Ошибка вычисления метрик",
    "STORE_ERROR": "Хранилище результатов недоступно",
    "PARSE_ERROR": "Ошибка разбора хранилища результатов",
    "DUPLICATE_RUN": "Повторная запись для одного запуска",
    "ANALYSIS_NOT_FOUND": "Результаты анализа не найдены",
}

LOG_FORMATS = {
    "RUN_START": "[{index}/{total}] {classifier} {hyperparams} {vector}",
    "RUN_DONE": "[{index}/{total}] {classifier} {hyperparams} {vector} acc={accuracy:.2f} loss={loss:.4f} ({seconds:.1f}s)",
    "RUN_FAILED": "[{index}/{total}] {classifier} {hyperparams} {vector} FAILED: {error}",
}

__all__ = [
    "APP_VERSION",
    "IMAGE_SIZE",
    "PIXEL_MAX",
    "N_CLASSES",
    "IDX_IMAGE_MAGIC",
    "IDX_LABEL_MAGIC",
    "GZIP_PREFIX",
    "TRAIN_SHARE",
    "DEFAULT_SUBSAMPLE_SIZE",
    "DEFAULT_SEED",
    "AUGMENTATION_NAMES",
    "N_AUGMENTATIONS",
    "MAX_DISTINCT_VECTORS",
    "DEFAULT_PROBABILITIES",
    "DEFAULT_BLUR_KERNEL_SIZES",
    "DEFAULT_GAUSSIAN_BLUR_KERNEL_SIZES",
    "DEFAULT_DOWNSCALE_FACTOR",
    "DEFAULT_GAUSS_NOISE_VAR_LIMIT",
    "DEFAULT_SHIFT_LIMIT",
    "DEFAULT_SCALE_LIMIT",
    "DEFAULT_ROTATE_LIMIT",
    "OPTIMIZERS",
    "OPTIMIZER_LABELS",
    "DEFAULT_LEARNING_RATES",
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_EPOCH_SETTINGS",
    "ADAM_BETA1",
    "ADAM_BETA2",
    "ADAM_EPSILON",
    "ARCHITECTURES",
    "MLP_HIDDEN_UNITS",
    "LOSS_SCALE",
    "DEFAULT_VECTOR_COUNT",
    "VECTOR_BIT_PROBABILITY",
    "RUN_STATUS_DONE",
    "RUN_STATUS_FAILED",
    "RUN_STATUSES",
    "METRICS",
    "DEFAULT_METRIC",
    "RELIABILITY_MODES",
    "DEFAULT_RELIABILITY_MODE",
    "SENSITIVITY_THRESHOLD",
    "TOP_N_RELIABLE",
    "MIN_RECOMMENDED_SAMPLES",
    "RANK_TOLERANCE",
    "NORMALIZATION_TOLERANCE",
    "EXIT_OK",
    "EXIT_RUNTIME_ERROR",
    "EXIT_USAGE_ERROR",
    "PLAN_FILENAME",
    "STORE_FILENAME",
    "FITS_FILENAME",
    "TENSOR_FILENAME",
    "METRICS_FILENAME",
    "ANALYSIS_MANIFEST_FILENAME",
    "REPORT_FILENAME",
    "INTERCEPTS_FILENAME",
    "SERIES_FILENAME",
    "RECORD_KEY_SEPARATOR",
    "SERIES_SEPARATOR",
    "ERROR_MESSAGES",
    "LOG_FORMATS",
]
