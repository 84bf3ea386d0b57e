from django.apps import AppConfig


class ShapeGradientConfig(AppConfig):
    name = "apps.shape_gradient"
    verbose_name = "Shape gradient"
