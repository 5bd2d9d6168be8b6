from ...services.design import ExperimentGrid, build_plan, generate_vectors, save_plan
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = "Генерирует векторы аугментаций и записывает план запусков"

    config_flags = {"plan": "plan", "seed": "grid.seed"}

    def add_command_arguments(self, parser):
        parser.add_argument("--plan", help="Путь к файлу плана")
        parser.add_argument(
            "--seed", type=int, help="Базовый сид векторов, запусков и разбиения данных"
        )

    def run_pipeline(self, config, options):
        vectors = generate_vectors(config.vector_count, config.seed)
        grid = ExperimentGrid(
            classifiers=config.classifiers,
            hyperparams=config.hyperparams,
            vectors=vectors,
            seed_base=config.seed,
        )
        plan = build_plan(grid, config.augmentation)
        path = save_plan(plan, config.plan_path)
        self.stdout.write(f"{grid.summary()} -> {path}")
