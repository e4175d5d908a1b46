from django.urls import path
from . import api

urlpatterns = [
    path('problems/', api.create_problem, name='create_problem'),
    path('problems/<int:problem_id>/runs/', api.problem_runs, name='problem_runs'),
]
