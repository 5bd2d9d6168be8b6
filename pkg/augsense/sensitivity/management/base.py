import logging

from django.core.management.base import BaseCommand

from ..exceptions import handle_command_errors
from ..services.config import PipelineConfig, load_config

logger = logging.getLogger(__name__)


class PipelineCommand(BaseCommand):
    """
    Базовый класс для команд пайплайна, который реализует паттерн:
    - сбор конфигурации (настройки, --config, --set, флаги команды)
    - валидация через ConfigSerializer
    - вызов сервиса
    - перевод исключений пайплайна в коды выхода
    """

    # dest опции -> ключ конфигурации через точку
    config_flags = {}

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON-файл конфигурации")
        parser.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Переопределение поля конфигурации, например grid.vector_count=12",
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def get_flags(self, options):
        flags = {}
        for dest, key in self.config_flags.items():
            flags[key] = options.get(dest)
        return flags

    @handle_command_errors
    def handle(self, *args, **options):
        config = load_config(
            options.get("config"), options.get("overrides") or (), self.get_flags(options)
        )
        return self.run_pipeline(config, options)

    def run_pipeline(self, config: PipelineConfig, options):
        raise NotImplementedError
