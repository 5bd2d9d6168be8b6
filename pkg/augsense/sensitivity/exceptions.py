import functools
import logging

from django.core.management.base import CommandError

from .constants import ERROR_MESSAGES, EXIT_RUNTIME_ERROR, EXIT_USAGE_ERROR

logger = logging.getLogger(__name__)


class AugSenseException(Exception):
    """Базовое исключение пайплайна"""

    default_message = ERROR_MESSAGES["INTERNAL_ERROR"]
    default_exit_code = EXIT_RUNTIME_ERROR

    def __init__(self, message=None, exit_code=None):
        self.message = message or self.default_message
        self.exit_code = exit_code or self.default_exit_code
        super().__init__(self.message)


class ValidationException(AugSenseException):
    """Исключение для нарушенных предусловий"""

    default_message = ERROR_MESSAGES["VALIDATION_ERROR"]
    default_exit_code = EXIT_USAGE_ERROR


class ConfigurationException(ValidationException):
    """Исключение для ошибок конфигурации"""

    default_message = ERROR_MESSAGES["CONFIG_ERROR"]


class DatasetFormatException(AugSenseException):
    """Неверная сигнатура или размерности IDX"""

    default_message = ERROR_MESSAGES["IDX_FORMAT_ERROR"]


class DatasetConsistencyException(AugSenseException):
    """Количество изображений и меток не совпадает"""

    default_message = ERROR_MESSAGES["IDX_CONSISTENCY_ERROR"]


class DatasetIOException(AugSenseException):
    """Обрезанный или нечитаемый файл"""

    default_message = ERROR_MESSAGES["IDX_IO_ERROR"]


class TrainingDivergedException(AugSenseException):
    """Лосс стал нечисловым во время обучения"""

    default_message = ERROR_MESSAGES["TRAINING_DIVERGED"]

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"{self.default_message} на эпохе {epoch}")


class NormalizationException(AugSenseException):
    default_message = ERROR_MESSAGES["NORMALIZATION_ERROR"]


class IncompleteGridException(AugSenseException):
    """Исключение для неполной сетки; перечисляет пропущенные ячейки"""

    default_message = ERROR_MESSAGES["INCOMPLETE_GRID"]

    def __init__(self, missing, message=None):
        self.missing = list(missing)
        cells = "; ".join(str(cell) for cell in self.missing[:10])
        if len(self.missing) > 10:
            cells += f"; ... (+{len(self.missing) - 10})"
        super().__init__(message or f"{self.default_message}: {cells}")


class MetricsException(AugSenseException):
    default_message = ERROR_MESSAGES["METRICS_ERROR"]


class StoreException(AugSenseException):
    """Хранилище результатов нельзя открыть на запись"""

    default_message = ERROR_MESSAGES["STORE_ERROR"]


class ResultParseException(AugSenseException):
    """Испорченная строка хранилища; содержит номер строки"""

    default_message = ERROR_MESSAGES["PARSE_ERROR"]

    def __init__(self, line_number, detail):
        self.line_number = line_number
        super().__init__(f"{self.default_message}, строка {line_number}: {detail}")


class DuplicateRunException(ResultParseException):
    """Одна и та же тройка (классификатор, гиперпараметры, вектор) встречена дважды"""

    default_message = ERROR_MESSAGES["DUPLICATE_RUN"]

    def __init__(self, line_number, key):
        self.key = key
        super().__init__(line_number, " / ".join(key))


class AnalysisNotFoundException(AugSenseException):
    default_message = ERROR_MESSAGES["ANALYSIS_NOT_FOUND"]


def handle_command_errors(func):
    """
    Декоратор для management-команд: переводит исключения пайплайна в CommandError
    с соответствующим кодом выхода
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CommandError:
            raise
        except AugSenseException as e:
            logger.error(f"{type(e).__name__} in {func.__qualname__}: {e.message}")
            raise CommandError(e.message, returncode=e.exit_code)
        except Exception as e:
            logger.error(f"Unhandled error in {func.__qualname__}: {e}", exc_info=True)
            raise CommandError(
                f"{ERROR_MESSAGES['INTERNAL_ERROR']}: {e}",
                returncode=EXIT_RUNTIME_ERROR,
            )

    return wrapper
