from django.conf import settings

from IFS.problem_service import parse_problem

PROBLEMS_DIR = settings.BASE_DIR / 'problems'

# Shipped problems whose triple is Hadamard.
HADAMARD_PROBLEMS = ('example51', 'quarter_cantor')


def load_problem(name: str):
    return parse_problem(PROBLEMS_DIR / f'{name}.json')


def load_triple(name: str):
    return load_problem(name).triple


def problem_path(name: str) -> str:
    return str(PROBLEMS_DIR / f'{name}.json')
