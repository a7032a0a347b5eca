from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase, override_settings

from isvd.const import DEFAULT_MAX_RANK, DEFAULT_TOL
from isvd.drivers import BaseDriver, Isvd3Driver
from isvd.utils import class_import_helper, get_setting, plural


class TestClassImportHelper(SimpleTestCase):

    def test_class_import_helper(self):
        cls = class_import_helper(
            "isvd.drivers.Isvd3Driver",
            "driver_class",
            BaseDriver,
        )
        self.assertIs(Isvd3Driver, cls)

    def test_class_import_helper_non_string_raises_valueerror(self):
        with self.assertRaises(ValueError):
            class_import_helper(Isvd3Driver, "driver_class", BaseDriver)

    def test_class_import_helper_invalid_path_raises_improperlyconfigured(self):
        with self.assertRaises(ImportError):
            # ensure this module doesn't actually exist
            import _  # noqa: F401
        with self.assertRaises(ImproperlyConfigured):
            class_import_helper("_.Isvd3Driver", "driver_class", BaseDriver)

    def test_class_import_helper_wrong_required_type_raises_valueerror(self):
        self.assertFalse(issubclass(Isvd3Driver, str))  # ensure it's not
        with self.assertRaises(ValueError):
            class_import_helper("isvd.drivers.Isvd3Driver", "driver", str)

    def test_class_import_helper_non_class_raises_valueerror(self):
        with self.assertRaises(ValueError):
            class_import_helper("isvd.utils.plural", "driver", BaseDriver)

    def test_class_import_helper_require_type_optional(self):
        func = class_import_helper("isvd.utils.class_import_helper", "f")
        self.assertIs(class_import_helper, func)


class TestGetSetting(SimpleTestCase):

    def test_get_setting_default(self):
        self.assertEqual(DEFAULT_TOL, get_setting("TOL"))
        self.assertEqual(DEFAULT_MAX_RANK, get_setting("MAX_RANK"))

    @override_settings(ISVD_TOL=1e-8)
    def test_get_setting_override(self):
        self.assertEqual(1e-8, get_setting("TOL"))

    def test_get_setting_unknown_name_raises_keyerror(self):
        with self.assertRaises(KeyError):
            get_setting("NOPE")


class TestPlural(SimpleTestCase):

    def test_plural(self):
        self.assertEqual("1 trial", plural(1, "trial"))
        self.assertEqual("0 trials", plural(0, "trial"))
        self.assertEqual("3 trials", plural(3, "trial"))
        self.assertEqual("2 properties", plural(2, "property", "properties"))
