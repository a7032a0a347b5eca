from django.core.exceptions import ImproperlyConfigured
from django.utils.module_loading import import_string

from . import const

_SETTING_DEFAULTS = {
    "TOL": const.DEFAULT_TOL,
    "TOL_ORTH": const.DEFAULT_TOL_ORTH,
    "MAX_RANK": const.DEFAULT_MAX_RANK,
    "ORTH_SAMPLE_EVERY": const.DEFAULT_ORTH_SAMPLE_EVERY,
    "DESK_SCALE_LIMIT": const.DEFAULT_DESK_SCALE_LIMIT,
    "DRIVERS": const.DEFAULT_DRIVERS,
}


def get_setting(name):
    """Returns the value of the ``ISVD_<name>`` Django setting, or the package
    default from ``isvd.const`` if the setting is not defined.

    :param name: setting name without the ``ISVD_`` prefix.
    :raises: ``KeyError`` for names that have no package default.
    """
    from django.conf import settings
    default = _SETTING_DEFAULTS[name]
    if not settings.configured:
        # plain library use, outside of a Django project
        return default
    return getattr(settings, f"ISVD_{name}", default)


def class_import_helper(dotted_path, item_description, require_type=None):
    """Returns an imported class described by ``dotted_path``.

    :param dotted_path: Python syntax "dotted path" of class to be imported.
    :param item_description: Description for generating helpful exception
                             messages.
    :param require_type: (Optional) require that the imported class is a
                         subclass of this.
    :raises: ImproperlyConfigured, ValueError
    """
    if not isinstance(dotted_path, str):
        # import_string() fails with a confusing AttributeError otherwise
        raise ValueError(
            f"invalid {item_description}: expected 'str', "
            f"got {dotted_path!r}"
        )

    try:
        class_ = import_string(dotted_path)
    except ImportError as exc:
        msg = f"failed to import {item_description}: {dotted_path!r}"
        raise ImproperlyConfigured(msg) from exc

    if require_type is not None:
        if not isinstance(class_, type) or not issubclass(class_, require_type):
            raise ValueError(
                f"invalid imported {item_description}: expected subclass of "
                f"{require_type.__name__!r}, got {class_!r}"
            )
    return class_


def plural(count, noun, plural_noun=None):
    if count == 1:
        return f"{count} {noun}"
    return f"{count} {plural_noun or noun + 's'}"
