# --- Third-Party Library Imports ---
from django.conf import settings

# Used when the project settings do not define a key (e.g. a trimmed test settings module).
DEFAULTS = {
    "TOL_UNITARY": 1e-12,
    "TOL_CERTIFY": 1e-2,
    "TAIL_TOL": 1e-10,
    "WB_ONE_TOL": 1e-12,
    "CLOUD_BUDGET": 2 ** 20,
    "WORD_BUDGET": 2 ** 20,
    "PAIR_CAP": 10 ** 6,
    "RESIDUE_BOUND": 4096,
    "PATHS": 100_000,
    "STEPS": 64,
    "SEED": 20080704,
    "WORKERS": 4,
    "CHUNK_SIZE": 8192,
    "CSV_PRECISION": 12,
    "CYCLE_DIST_TOL": 1e-6,
    "SUBSPACE_DIST_TOL": 1e-4,
    "PERIOD_MAX_N": 8,
    "MAX_PRODUCT_DEPTH": 256,
    "PROBLEMS_DIR": None,
}


def spectral_setting(name: str):
    """Return a numeric default from settings.SPECTRAL, falling back to DEFAULTS."""
    configured = getattr(settings, "SPECTRAL", {})
    if name in configured:
        return configured[name]
    return DEFAULTS[name]
