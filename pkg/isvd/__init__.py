from .isvd import (  # noqa: F401
    finalize_isvd3,
    finalize_isvd4,
    initialize,
    run_isvd1,
    run_isvd2,
    run_isvd3,
    run_isvd4,
    update_isvd1,
    update_isvd2,
    update_isvd3,
    update_isvd4,
)

__version__ = "0.3.1"
