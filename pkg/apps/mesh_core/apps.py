from django.apps import AppConfig


class MeshCoreConfig(AppConfig):
    name = "apps.mesh_core"
    verbose_name = "Mesh core"
