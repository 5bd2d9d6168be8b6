import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON
from ..exceptions import ValidationException
from ..models import HyperParams

logger = logging.getLogger(__name__)


def sgd_step(w, g, lr: float):
    """w - lr * g"""
    return w - lr * g


@dataclass(frozen=True)
class AdamState:
    """Накопители первого и второго моментов и номер шага"""

    m: np.ndarray
    u: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, value) -> "AdamState":
        return cls(np.zeros_like(value, dtype=np.float64), np.zeros_like(value, dtype=np.float64))


def adam_step(
    state: AdamState,
    g,
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPSILON,
) -> Tuple[AdamState, np.ndarray]:
    """
    Один шаг Adam. Возвращает новое состояние и приращение параметра
    delta = -lr * m_hat / (sqrt(u_hat) + eps)
    """
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * g
    u = beta2 * state.u + (1 - beta2) * np.square(g)
    m_hat = m / (1 - beta1**t)
    u_hat = u / (1 - beta2**t)
    delta = -lr * m_hat / (np.sqrt(u_hat) + eps)
    return AdamState(m, u, t), delta


class SGD:
    def __init__(self, parameters: Dict[str, np.ndarray], lr: float):
        self.parameters = parameters
        self.lr = lr

    def step(self, gradients: Dict[str, np.ndarray]):
        for name, g in gradients.items():
            self.parameters[name] = sgd_step(self.parameters[name], g, self.lr)


class Adam(SGD):
    def __init__(self, parameters: Dict[str, np.ndarray], lr: float):
        super().__init__(parameters, lr)
        self.states = {name: AdamState.zeros_like(p) for name, p in parameters.items()}

    def step(self, gradients: Dict[str, np.ndarray]):
        for name, g in gradients.items():
            self.states[name], delta = adam_step(self.states[name], g, self.lr)
            self.parameters[name] = self.parameters[name] + delta


OPTIMIZER_CLASSES = {"sgd": SGD, "adam": Adam}


def build_optimizer(hp: HyperParams, parameters: Dict[str, np.ndarray]) -> SGD:
    try:
        optimizer_class = OPTIMIZER_CLASSES[hp.optimizer]
    except KeyError:
        raise ValidationException(f"Неизвестный оптимизатор: {hp.optimizer}")
    return optimizer_class(parameters, hp.learning_rate)
