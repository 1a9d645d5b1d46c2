from django.apps import AppConfig


class SeqmodelConfig(AppConfig):
    name = 'seqmodel'
    verbose_name = "Differentiable sequence models"
