from django.apps import AppConfig


class SweAdjointConfig(AppConfig):
    name = "apps.swe_adjoint"
    verbose_name = "Shallow-water adjoint solver"
