INSTALLED_APPS = [
    "isvd",
]

SECRET_KEY = "test"

# -------------
# isvd settings
#
# -- Default values below, override as needed.
# ISVD_TOL = 1e-12
# ISVD_TOL_ORTH = 1e-10
# ISVD_MAX_RANK = 2000
# ISVD_ORTH_SAMPLE_EVERY = 10
# ISVD_DESK_SCALE_LIMIT = 10 ** 8
# ISVD_DRIVERS = [
#     "isvd.drivers.Isvd1Driver",
#     "isvd.drivers.Isvd2Driver",
#     "isvd.drivers.Isvd3Driver",
#     "isvd.drivers.Isvd4Driver",
# ]
