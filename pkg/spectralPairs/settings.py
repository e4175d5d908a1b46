"""
Django settings for the spectralPairs project.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
# --- Imports ---
# os: For reading environment variables.
import os
# logging: To configure and use logging throughout the application.
import logging
# pathlib.Path: Provides an object-oriented way to handle filesystem paths.
from pathlib import Path
# dj_database_url: Configures the database from a single URL string.
import dj_database_url
# dotenv: To load environment variables from a .env file for local development.
from dotenv import load_dotenv

# Get a logger instance for this module.
logger = logging.getLogger(__name__)

# --- Path Configuration ---
# BASE_DIR points to the project's root directory (the one containing 'manage.py').
BASE_DIR = Path(__file__).resolve().parent.parent

# --- Environment Variable Loading ---
env_path = BASE_DIR / '.env'
if env_path.exists():
    logger.info(f"Loading environment variables from {env_path}")
    load_dotenv(dotenv_path=env_path)

# --- Core Settings ---
SECRET_KEY = os.getenv('SECRET_KEY', 'a-default-insecure-key-for-development-only')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = ['127.0.0.1', 'localhost', 'testserver']

# Extra hosts from the environment (e.g., 'www.example.com,api.example.com').
env_hosts = os.getenv('ALLOWED_HOSTS')
if env_hosts:
    ALLOWED_HOSTS.extend([host.strip() for host in env_hosts.split(',')])


# --- Application Definition ---
INSTALLED_APPS = [
    # Django's built-in apps
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'whitenoise.runserver_nostatic',

    # Third-party apps
    'rest_framework',

    # Local applications
    'IFS',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'whitenoise.middleware.WhiteNoiseMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'spectralPairs.urls'

# Only the admin renders templates.
TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'spectralPairs.wsgi.application'

# --- Database Configuration ---
# DATABASE_URL selects Postgres (psycopg2) in production; run records go to SQLite otherwise.
DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
    )
}

AUTH_PASSWORD_VALIDATORS = [
    {'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator'},
    {'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator'},
    {'NAME': 'django.contrib.auth.password_validation.CommonPasswordValidator'},
    {'NAME': 'django.contrib.auth.password_validation.NumericPasswordValidator'},
]


# --- Internationalization ---
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# --- Static Files ---
STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'
STORAGES = {
    'default': {'BACKEND': 'django.core.files.storage.FileSystemStorage'},
    'staticfiles': {'BACKEND': 'whitenoise.storage.CompressedManifestStaticFilesStorage'},
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# --- REST Framework ---
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [
        'rest_framework.authentication.SessionAuthentication',
        'rest_framework.authentication.BasicAuthentication',
    ],
    'DEFAULT_PERMISSION_CLASSES': ['rest_framework.permissions.IsAuthenticated'],
}


# --- Spectral Computation Settings ---
def _env_number(name: str, default, cast=float):
    """SPECTRAL_<NAME> from the environment, cast like the default."""
    raw = os.getenv(f'SPECTRAL_{name}')
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        logger.warning(f"Ignoring SPECTRAL_{name}={raw!r}; using {default}.")
        return default


SPECTRAL = {
    'TOL_UNITARY': _env_number('TOL_UNITARY', 1e-12),
    'TOL_CERTIFY': _env_number('TOL_CERTIFY', 1e-2),
    'TAIL_TOL': _env_number('TAIL_TOL', 1e-10),
    'WB_ONE_TOL': _env_number('WB_ONE_TOL', 1e-12),
    'CLOUD_BUDGET': _env_number('CLOUD_BUDGET', 2 ** 20, int),
    'WORD_BUDGET': _env_number('WORD_BUDGET', 2 ** 20, int),
    'PAIR_CAP': _env_number('PAIR_CAP', 10 ** 6, int),
    'RESIDUE_BOUND': _env_number('RESIDUE_BOUND', 4096, int),
    'PATHS': _env_number('PATHS', 100_000, int),
    'STEPS': _env_number('STEPS', 64, int),
    'SEED': _env_number('SEED', 20080704, int),
    'WORKERS': _env_number('WORKERS', min(8, os.cpu_count() or 1), int),
    'CHUNK_SIZE': _env_number('CHUNK_SIZE', 8192, int),
    'CSV_PRECISION': _env_number('CSV_PRECISION', 12, int),
    'CYCLE_DIST_TOL': _env_number('CYCLE_DIST_TOL', 1e-6),
    'SUBSPACE_DIST_TOL': _env_number('SUBSPACE_DIST_TOL', 1e-4),
    'PERIOD_MAX_N': _env_number('PERIOD_MAX_N', 8, int),
    'MAX_PRODUCT_DEPTH': _env_number('MAX_PRODUCT_DEPTH', 256, int),
    'PROBLEMS_DIR': Path(os.getenv('SPECTRAL_PROBLEMS_DIR', BASE_DIR / 'problems')),
}

# --- Logging Configuration ---
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '[%(asctime)s] %(levelname)s [%(name)s:%(lineno)s] %(message)s',
            'datefmt': '%d/%b/%Y %H:%M:%S'
        },
    },
    'handlers': {
        'console': {
            # stderr, so JSON reports on stdout stay clean.
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose'
        },
    },
    'loggers': {
        'IFS': {
            'handlers': ['console'],
            'level': os.getenv('SPECTRAL_LOG_LEVEL', 'INFO'),
        },
    }
}
