from django.apps import AppConfig


class AlignmentConfig(AppConfig):
    name = 'alignment'
    verbose_name = "Performative time-series alignment"
