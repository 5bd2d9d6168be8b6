from ...constants import RELIABILITY_MODES
from ...exceptions import ValidationException
from ...services.analysis import load_analysis
from ...services.report import write_report
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = "Пишет markdown-отчет и файлы рядов коэффициентов по результатам анализа"

    config_flags = {"analysis": "analysis_dir", "out": "report_dir"}

    def add_command_arguments(self, parser):
        parser.add_argument("--analysis", help="Каталог результатов анализа")
        parser.add_argument("--out", help="Каталог отчета")
        parser.add_argument("--reliability-mode", choices=RELIABILITY_MODES)
        parser.add_argument("--sensitivity-threshold", type=float)
        parser.add_argument("--top-n", type=int)

    def run_pipeline(self, config, options):
        analysis = load_analysis(config.analysis_dir)
        manifest = analysis.manifest

        # пороги анализа, если не заданы явно
        def option(name):
            value = options.get(name)
            return manifest[name] if value is None else value

        threshold = option("sensitivity_threshold")
        top_n = option("top_n")
        if not threshold > 0 or top_n < 1:
            raise ValidationException("Порог должен быть положительным, top-n не меньше 1")

        path = write_report(
            analysis,
            config.report_dir,
            reliability_mode=option("reliability_mode"),
            sensitivity_threshold=threshold,
            top_n=top_n,
        )
        self.stdout.write(f"Report -> {path}")
