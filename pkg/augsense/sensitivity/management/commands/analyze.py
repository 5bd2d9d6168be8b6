from ...constants import METRICS, RELIABILITY_MODES
from ...services.analysis import analyze
from ...services.design import load_plan
from ...services.runner import load_results
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = "Строит регрессии, тензор коэффициентов и таблицу метрик"

    config_flags = {
        "plan": "plan",
        "store": "store",
        "out": "analysis_dir",
        "metric": "metric",
        "reliability_mode": "reliability_mode",
        "sensitivity_threshold": "sensitivity_threshold",
        "top_n": "top_n",
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--plan", help="Путь к файлу плана")
        parser.add_argument("--store", help="Хранилище результатов (JSON lines)")
        parser.add_argument("--out", help="Каталог результатов анализа")
        parser.add_argument("--metric", choices=METRICS)
        parser.add_argument("--reliability-mode", choices=RELIABILITY_MODES)
        parser.add_argument("--sensitivity-threshold", type=float)
        parser.add_argument("--top-n", type=int)

    def run_pipeline(self, config, options):
        plan = load_plan(config.plan_path)
        table = load_results(config.store_path, plan.runs)
        result = analyze(
            plan,
            table,
            config.analysis_dir,
            metric=config.metric,
            reliability_mode=config.reliability_mode,
            sensitivity_threshold=config.sensitivity_threshold,
            top_n=config.top_n,
        )
        sensitive = [row.name for row in result.rows if row.sensitive]
        reliable = [row.name for row in result.rows if row.reliable]
        self.stdout.write(f"{len(result.fits)} fits -> {config.analysis_dir}")
        self.stdout.write(f"Sensitive: {', '.join(sensitive) or 'none'}")
        self.stdout.write(f"Reliable: {', '.join(reliable) or 'none'}")
