from django.apps import AppConfig


class FpsConfig(AppConfig):
    name = 'fps'
    verbose_name = "Feature Performative-Shifting"
