"""
Подключаемый интерфейс классификатора и две встроенные модели.

Сторонний бэкенд регистрируется декоратором `register_classifier` и должен
реализовать `forward` и `loss_and_gradients` над словарем параметров.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Callable, Dict, Tuple, Type

import numpy as np

from ..constants import IMAGE_SIZE, MLP_HIDDEN_UNITS, N_CLASSES, PIXEL_MAX
from ..exceptions import DatasetIOException, ValidationException
from ..models import ClassifierSpec

logger = logging.getLogger(__name__)

INPUT_DIM = IMAGE_SIZE * IMAGE_SIZE
MODEL_MAGIC = b"AUGM"

CLASSIFIER_REGISTRY: Dict[str, Type["Classifier"]] = {}


def register_classifier(architecture: str) -> Callable:
    """Декоратор регистрации архитектуры классификатора"""

    def decorator(cls):
        CLASSIFIER_REGISTRY[architecture] = cls
        cls.architecture = architecture
        return cls

    return decorator


def to_features(images: np.ndarray) -> np.ndarray:
    """(N, 28, 28) uint8 -> (N, 784) float64 в [0, 1]"""
    return images.reshape(images.shape[0], -1).astype(np.float64) / PIXEL_MAX


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Classifier:
    """Базовый класс: параметры хранятся в словаре имя -> массив float64"""

    architecture = ""

    def __init__(self, spec: ClassifierSpec, parameters: Dict[str, np.ndarray]):
        self.spec = spec
        self.parameters = parameters

    @classmethod
    def initialize(
        cls, spec: ClassifierSpec, rng: np.random.Generator, input_dim: int = INPUT_DIM
    ) -> "Classifier":
        raise NotImplementedError

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Логиты (N, 10)"""
        raise NotImplementedError

    def loss_and_gradients(
        self, x: np.ndarray, y: np.ndarray
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """Средняя кросс-энтропия и ее градиенты по всем параметрам"""
        raise NotImplementedError

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x))

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters.values()))


def _cross_entropy_grad(logits: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    n = logits.shape[0]
    log_probs = log_softmax(logits)
    loss = float(-log_probs[np.arange(n), y].mean())
    d_logits = np.exp(log_probs)
    d_logits[np.arange(n), y] -= 1.0
    return loss, d_logits / n


@register_classifier("linear-softmax")
class LinearSoftmaxClassifier(Classifier):
    """784 -> 10, аффинное преобразование и softmax"""

    @classmethod
    def initialize(cls, spec, rng, input_dim=INPUT_DIM):
        return cls(
            spec,
            {
                "W": _uniform_init(rng, input_dim, (input_dim, N_CLASSES)),
                "b": _uniform_init(rng, input_dim, (N_CLASSES,)),
            },
        )

    def forward(self, x):
        return x @ self.parameters["W"] + self.parameters["b"]

    def loss_and_gradients(self, x, y):
        loss, d_logits = _cross_entropy_grad(self.forward(x), y)
        return loss, {"W": x.T @ d_logits, "b": d_logits.sum(axis=0)}


@register_classifier("mlp")
class MLPClassifier(Classifier):
    """784 -> hidden (ReLU) -> 10"""

    @classmethod
    def initialize(cls, spec, rng, input_dim=INPUT_DIM):
        hidden = spec.hidden_units or MLP_HIDDEN_UNITS
        return cls(
            spec,
            {
                "W1": _uniform_init(rng, input_dim, (input_dim, hidden)),
                "b1": _uniform_init(rng, input_dim, (hidden,)),
                "W2": _uniform_init(rng, hidden, (hidden, N_CLASSES)),
                "b2": _uniform_init(rng, hidden, (N_CLASSES,)),
            },
        )

    def _hidden(self, x):
        return np.maximum(x @ self.parameters["W1"] + self.parameters["b1"], 0.0)

    def forward(self, x):
        return self._hidden(x) @ self.parameters["W2"] + self.parameters["b2"]

    def loss_and_gradients(self, x, y):
        pre = x @ self.parameters["W1"] + self.parameters["b1"]
        hidden = np.maximum(pre, 0.0)
        logits = hidden @ self.parameters["W2"] + self.parameters["b2"]
        loss, d_logits = _cross_entropy_grad(logits, y)

        d_hidden = (d_logits @ self.parameters["W2"].T) * (pre > 0)
        return loss, {
            "W1": x.T @ d_hidden,
            "b1": d_hidden.sum(axis=0),
            "W2": hidden.T @ d_logits,
            "b2": d_logits.sum(axis=0),
        }


def classifier_class(architecture: str) -> Type[Classifier]:
    try:
        return CLASSIFIER_REGISTRY[architecture]
    except KeyError:
        known = ", ".join(sorted(CLASSIFIER_REGISTRY))
        raise ValidationException(
            f"Неизвестная архитектура {architecture!r}; доступны: {known}"
        )


def build_classifier(
    spec: ClassifierSpec, rng: np.random.Generator, input_dim: int = INPUT_DIM
) -> Classifier:
    classifier = classifier_class(spec.architecture).initialize(spec, rng, input_dim)
    logger.debug(
        f"Initialized {spec.id} ({spec.architecture}) with {classifier.parameter_count} parameters"
    )
    return classifier


def save_model(classifier: Classifier, path, manifest: dict) -> Path:
    """
    Сохраняет параметры: заголовок с формами, затем little-endian float64,
    рядом JSON-манифест (классификатор, гиперпараметры, сид)
    """
    path = Path(path)
    names = sorted(classifier.parameters)
    header = [MODEL_MAGIC, struct.pack("<I", len(names))]
    body = []
    for name in names:
        value = np.asarray(classifier.parameters[name], dtype="<f8")
        encoded = name.encode("utf-8")
        header.append(struct.pack("<I", len(encoded)) + encoded)
        header.append(struct.pack(f"<I{value.ndim}I", value.ndim, *value.shape))
        body.append(value.tobytes())
    path.write_bytes(b"".join(header + body))

    sidecar = path.with_suffix(".json")
    sidecar.write_text(
        json.dumps(
            {
                **manifest,
                "architecture": classifier.spec.architecture,
                "parameters": classifier.parameter_count,
            },
            indent=2,
            sort_keys=True,
        ),
        encoding="utf-8",
    )
    return path


def load_model(path, spec: ClassifierSpec) -> Classifier:
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise DatasetIOException(f"{path} не является файлом модели")
    try:
        offset = 4
        (count,) = struct.unpack_from("<I", data, offset)
        offset += 4
        shapes = []
        for _ in range(count):
            (length,) = struct.unpack_from("<I", data, offset)
            offset += 4
            name = data[offset : offset + length].decode("utf-8")
            offset += length
            (ndim,) = struct.unpack_from("<I", data, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}I", data, offset)
            offset += 4 * ndim
            shapes.append((name, shape))

        parameters = {}
        for name, shape in shapes:
            size = int(np.prod(shape, dtype=np.int64))
            parameters[name] = (
                np.frombuffer(data, dtype="<f8", count=size, offset=offset)
                .reshape(shape)
                .astype(np.float64)
            )
            offset += 8 * size
    except (struct.error, ValueError) as e:
        raise DatasetIOException(f"Файл модели {path} поврежден: {e}")
    return classifier_class(spec.architecture)(spec, parameters)
