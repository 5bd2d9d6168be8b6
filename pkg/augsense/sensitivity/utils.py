import functools
import hashlib
import json
import logging
import time
from typing import Any, Callable, Dict, Tuple

logger = logging.getLogger(__name__)


def timing_decorator(func: Callable) -> Callable:
    """
    Декоратор для измерения времени выполнения этапов пайплайна
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        duration = round((time.perf_counter() - start_time) * 1000, 2)
        logger.info(f"{func.__name__} executed in {duration}ms")
        return result

    return wrapper


def stable_hash(*parts: Any, bits: int = 63) -> int:
    """
    Стабильный между процессами и платформами хэш (в отличие от hash())
    """
    payload = "\x1f".join(str(part) for part in parts).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big") & ((1 << bits) - 1)


def parse_override(raw: str) -> Tuple[str, Any]:
    """
    Разбирает `key=value`; значение читается как JSON, иначе остается строкой

    >>> parse_override("grid.vector_count=12")
    ('grid.vector_count', 12)
    """
    if "=" not in raw:
        raise ValueError(f"expected key=value, got {raw!r}")
    key, value = raw.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError(f"empty key in {raw!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def set_nested(document: Dict[str, Any], dotted_key: str, value: Any) -> None:
    """Устанавливает значение по ключу вида `a.b.c`, создавая промежуточные словари"""
    node = document
    parts = dotted_key.split(".")
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def format_float(value: float, precision: int = 6) -> str:
    """Детерминированное текстовое представление числа для CSV"""
    if value != value:
        return "nan"
    if value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{precision}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text
