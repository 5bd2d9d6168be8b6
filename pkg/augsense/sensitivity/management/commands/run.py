from django.core.management.base import CommandError

from ...constants import EXIT_RUNTIME_ERROR
from ...services.dataset import load_fashion_mnist
from ...services.design import baseline_runs, load_plan
from ...services.runner import execute, export_csv
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = "Обучает все запуски плана, пропуская уже записанные"

    config_flags = {
        "plan": "plan",
        "store": "store",
        "workers": "workers",
        "save_models": "save_models",
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--plan", help="Путь к файлу плана")
        parser.add_argument("--store", help="Хранилище результатов (JSON lines)")
        parser.add_argument("--workers", type=int, help="Количество процессов")
        parser.add_argument(
            "--baseline",
            action="store_true",
            help="Добавить запуски без аугментаций для каждой ячейки сетки",
        )
        parser.add_argument(
            "--save-models",
            action="store_true",
            default=None,
            help="Сохранять параметры обученных моделей рядом с хранилищем",
        )
        parser.add_argument("--export-csv", help="Экспортировать таблицу в CSV")

    def run_pipeline(self, config, options):
        plan = load_plan(config.plan_path)
        config.check_dataset()
        paths = config.dataset_paths()
        split, manifest = load_fashion_mnist(
            paths["train_images"],
            paths["train_labels"],
            paths["test_images"],
            paths["test_labels"],
            seed=plan.grid.seed_base,
            n_train=config.subsample,
        )
        self.stdout.write(
            f"Data: {manifest['n_train']} train / {manifest['n_valid']} valid"
            f" / {manifest['n_test']} test"
        )

        runs = list(plan.runs)
        if options.get("baseline"):
            runs += baseline_runs(plan.grid)

        model_dir = config.store_path.parent / "models" if config.save_models else None
        table = execute(
            runs,
            config.store_path,
            split,
            plan.augmentation,
            workers=config.workers,
            model_dir=model_dir,
        )
        if options.get("export_csv"):
            export_csv(table, options["export_csv"])

        self.stdout.write(f"{table.executed} executed, {table.skipped} skipped")
        failed = table.failed()
        if failed:
            raise CommandError(
                f"{len(failed)} runs failed, see {config.store_path}",
                returncode=EXIT_RUNTIME_ERROR,
            )
