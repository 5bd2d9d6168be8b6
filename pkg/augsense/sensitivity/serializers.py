from rest_framework import serializers

from .constants import (
    DEFAULT_BATCH_SIZE,
    ERROR_MESSAGES,
    MAX_DISTINCT_VECTORS,
    METRICS,
    MLP_HIDDEN_UNITS,
    N_AUGMENTATIONS,
    OPTIMIZERS,
    RELIABILITY_MODES,
    RUN_STATUS_DONE,
    RUN_STATUSES,
    SERIES_SEPARATOR,
)


class VectorValidator:
    """Валидатор для битовой строки вектора аугментаций"""

    @staticmethod
    def validate_vector(value):
        value = value.strip()
        if len(value) != N_AUGMENTATIONS or set(value) - {"0", "1"}:
            raise serializers.ValidationError(
                f"Ожидалась строка из {N_AUGMENTATIONS} символов '0'/'1'"
            )
        return value


class ClassifierSpecSerializer(serializers.Serializer):
    id = serializers.CharField(max_length=64)
    architecture = serializers.CharField(max_length=64, required=False)
    hidden_units = serializers.IntegerField(
        min_value=1, required=False, default=MLP_HIDDEN_UNITS
    )

    def validate_id(self, value):
        if "/" in value or SERIES_SEPARATOR in value:
            raise serializers.ValidationError(
                f"Идентификатор не может содержать '/' или '{SERIES_SEPARATOR}'"
            )
        return value

    def validate(self, data):
        from .services.classifiers import CLASSIFIER_REGISTRY

        data = dict(data)
        data.setdefault("architecture", data["id"])
        if data["architecture"] not in CLASSIFIER_REGISTRY:
            raise serializers.ValidationError(
                {
                    "architecture": f"Неизвестная архитектура; доступны: "
                    f"{', '.join(sorted(CLASSIFIER_REGISTRY))}"
                }
            )
        return data


class HyperParamsSerializer(serializers.Serializer):
    optimizer = serializers.CharField(max_length=16)
    epochs = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField(required=False, allow_null=True)
    batch_size = serializers.IntegerField(
        min_value=1, required=False, default=DEFAULT_BATCH_SIZE
    )

    def validate_optimizer(self, value):
        value = value.strip().lower()
        if value not in OPTIMIZERS:
            raise serializers.ValidationError(
                f"Оптимизатор должен быть одним из: {', '.join(OPTIMIZERS)}"
            )
        return value

    def validate_learning_rate(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError("Скорость обучения должна быть положительной")
        return value


class GridSerializer(serializers.Serializer):
    classifiers = ClassifierSpecSerializer(many=True)
    hyperparams = HyperParamsSerializer(many=True)
    vectors = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    seed_base = serializers.IntegerField(min_value=0)

    def validate_vectors(self, value):
        return [VectorValidator.validate_vector(v) for v in value]


class RunSpecSerializer(serializers.Serializer):
    index = serializers.IntegerField(min_value=0)
    classifier = ClassifierSpecSerializer()
    hp_index = serializers.IntegerField(min_value=0)
    hyperparams = HyperParamsSerializer()
    vector = serializers.CharField()
    seed = serializers.IntegerField(min_value=0)

    def validate_vector(self, value):
        return VectorValidator.validate_vector(value)


class PlanSerializer(serializers.Serializer):
    version = serializers.CharField(required=False)
    summary = serializers.CharField(required=False)
    grid = GridSerializer()
    augmentation = serializers.DictField(required=False)
    runs = RunSpecSerializer(many=True, allow_empty=False)


class RunRecordSerializer(serializers.Serializer):
    """Проверка одной строки хранилища результатов"""

    classifier = serializers.CharField()
    hyperparams = serializers.CharField()
    optimizer = serializers.CharField()
    epochs = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField()
    batch_size = serializers.IntegerField(min_value=1)
    vector = serializers.CharField()
    seed = serializers.IntegerField(min_value=0)
    status = serializers.ChoiceField(choices=RUN_STATUSES)
    test_accuracy = serializers.FloatField(
        min_value=0.0, max_value=100.0, required=False, allow_null=True
    )
    test_loss = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    test_loss_scaled = serializers.FloatField(
        min_value=0.0, required=False, allow_null=True
    )
    valid_accuracy = serializers.FloatField(
        min_value=0.0, max_value=100.0, required=False, allow_null=True
    )
    valid_loss = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    seconds = serializers.FloatField(min_value=0.0, required=False, default=0.0)
    error = serializers.CharField(required=False, allow_blank=True, default="")

    def validate_vector(self, value):
        return VectorValidator.validate_vector(value)

    def validate(self, data):
        if data["status"] == RUN_STATUS_DONE and (
            data.get("test_accuracy") is None or data.get("test_loss") is None
        ):
            raise serializers.ValidationError(
                "Завершенный запуск должен содержать точность и лосс"
            )
        return data


class DataSourceSerializer(serializers.Serializer):
    dir = serializers.CharField()
    train_images = serializers.CharField()
    train_labels = serializers.CharField()
    test_images = serializers.CharField()
    test_labels = serializers.CharField()
    subsample = serializers.IntegerField(min_value=1, allow_null=True, required=False)


class GridConfigSerializer(serializers.Serializer):
    classifiers = ClassifierSpecSerializer(many=True, allow_empty=False)
    hyperparams = HyperParamsSerializer(many=True, required=False, allow_empty=False)
    vector_count = serializers.IntegerField(min_value=1, max_value=MAX_DISTINCT_VECTORS)
    seed = serializers.IntegerField(min_value=0)


class ConfigSerializer(serializers.Serializer):
    """Сериализатор для объединенного документа конфигурации пайплайна"""

    data = DataSourceSerializer()
    augmentation = serializers.DictField(required=False, default=dict)
    grid = GridConfigSerializer()
    output_dir = serializers.CharField()
    plan = serializers.CharField(required=False, allow_null=True)
    store = serializers.CharField(required=False, allow_null=True)
    analysis_dir = serializers.CharField(required=False, allow_null=True)
    report_dir = serializers.CharField(required=False, allow_null=True)
    workers = serializers.IntegerField(min_value=1)
    save_models = serializers.BooleanField(required=False, default=False)
    metric = serializers.ChoiceField(choices=METRICS)
    reliability_mode = serializers.ChoiceField(choices=RELIABILITY_MODES)
    sensitivity_threshold = serializers.FloatField()
    top_n = serializers.IntegerField(min_value=1)

    def validate_sensitivity_threshold(self, value):
        if not value > 0:
            raise serializers.ValidationError("Порог чувствительности должен быть положительным")
        return value

    def validate_augmentation(self, value):
        from .exceptions import ValidationException
        from .models import AugmentationParams

        try:
            AugmentationParams.from_dict(value)
        except (ValidationException, TypeError, ValueError) as e:
            raise serializers.ValidationError(getattr(e, "message", str(e)))
        return value

    def validate(self, data):
        ids = [c["id"] for c in data["grid"]["classifiers"]]
        if len(set(ids)) != len(ids):
            raise serializers.ValidationError(
                {"grid": ERROR_MESSAGES["VALIDATION_ERROR"] + ": повтор классификатора"}
            )
        return data
