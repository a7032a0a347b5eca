INSTALLED_APPS = [
    "isvd",
]

SECRET_KEY = "example"

# The snapshot experiments use the defaults; a looser threshold suits streams
# that carry measurement noise.
ISVD_TOL = 1e-12
ISVD_ORTH_SAMPLE_EVERY = 50

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {"class": "logging.StreamHandler"},
    },
    "loggers": {
        "isvd": {"handlers": ["console"], "level": "INFO"},
    },
}
