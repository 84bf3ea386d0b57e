from django.apps import AppConfig


class GeometryRegConfig(AppConfig):
    name = "apps.geometry_reg"
    verbose_name = "Geometric regularization"
