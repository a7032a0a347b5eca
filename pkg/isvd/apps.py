from django.apps import AppConfig


class IsvdConfig(AppConfig):

    name = "isvd"

    def ready(self):
        from .drivers import driver_registry
        driver_registry.setup_drivers()
