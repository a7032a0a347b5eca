from django.apps import apps
from django.test import SimpleTestCase

from isvd.drivers import driver_registry


class TestIsvdConfig(SimpleTestCase):

    def test_config_ready_sets_drivers(self):
        # ensure it's not empty already
        self.assertNotEqual([], driver_registry.algorithms)
        try:
            driver_registry.drivers = {}
            apps.get_app_config("isvd").ready()
            self.assertEqual(
                ["isvd1", "isvd2", "isvd3", "isvd4"],
                driver_registry.algorithms,
            )
        finally:
            # reset to defaults
            driver_registry.setup_drivers()
