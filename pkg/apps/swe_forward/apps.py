from django.apps import AppConfig


class SweForwardConfig(AppConfig):
    name = "apps.swe_forward"
    verbose_name = "Shallow-water forward solver"
