from django.apps import AppConfig


class DgSpaceConfig(AppConfig):
    name = "apps.dg_space"
    verbose_name = "DG space"
