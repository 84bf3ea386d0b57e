"""
Django settings for the shoreopt project.

The project has no web surface: Django supplies the settings layer, the
application registry, the management-command CLI and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Quick-start development settings - unsuitable for production

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config("SECRET_KEY", default="django-insecure-shoreopt-local-runs-only")

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Local apps
    "apps.mesh_core",
    "apps.dg_space",
    "apps.swe_forward",
    "apps.swe_adjoint",
    "apps.geometry_reg",
    "apps.shape_gradient",
    "apps.optimizer",
    "apps.scenarios",
]


# Database
# No persistence layer: scenarios read and write plain files.

DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Solver runtime settings

SHOREOPT = {
    "OUTPUT_ROOT": config("SHOREOPT_OUTPUT_ROOT", default=str(BASE_DIR / "runs")),
    "THREADS": config("SHOREOPT_THREADS", default=1, cast=int),
    "SNAPSHOT_STRIDE": config("SHOREOPT_SNAPSHOT_STRIDE", default=0, cast=int),
}


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOG_LEVEL = config("LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "apps": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}
