from django.apps import AppConfig


class IfsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'IFS'
    verbose_name = 'Spectral pairs for affine IFSs'
