from django.apps import AppConfig


class MetricsConfig(AppConfig):
    name = 'metrics'
    verbose_name = "Forecast evaluation metrics"
