import logging

from django.http import HttpRequest
from django.shortcuts import get_object_or_404
from rest_framework import status
from rest_framework.authentication import BasicAuthentication, SessionAuthentication
from rest_framework.decorators import api_view, authentication_classes, permission_classes
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from .exceptions import ParseError, SpectralError, ValidationError
from .models import ProblemRecord, RunRecord
from .pipeline_logic import run_check_hadamard, run_find_cycles
from .problem_service import problem_from_dict

logger = logging.getLogger(__name__)

# Subcommands cheap enough to run inside a request.
RUNNERS = {
    'check_hadamard': lambda problem, options: run_check_hadamard(
        problem, tol=options.get('tol_unitary'), search=bool(options.get('search', False)), seed=options.get('seed'),
    ),
    'find_cycles': lambda problem, options: run_find_cycles(
        problem, m_max=options.get('m_max'), use_filter=bool(options.get('filter', True)),
    ),
}


class CsrfExemptSessionAuthentication(SessionAuthentication):
    """Custom authentication class to disable CSRF for API endpoints."""
    def enforce_csrf(self, request):
        return  # Skip CSRF verification


def _error_status(error: SpectralError) -> int:
    if isinstance(error, (ValidationError, ParseError)):
        return status.HTTP_400_BAD_REQUEST
    return status.HTTP_422_UNPROCESSABLE_ENTITY


@api_view(['POST'])
@authentication_classes([CsrfExemptSessionAuthentication, BasicAuthentication])
@permission_classes([IsAuthenticated])
def create_problem(request: HttpRequest):
    """
    API endpoint to validate and store a problem.

    Returns:
        JSON with the record id and the Hadamard defect of the triple.
    """
    try:
        if not isinstance(request.data, dict):
            return Response({'error': 'A JSON object is required'}, status=status.HTTP_400_BAD_REQUEST)
        problem = problem_from_dict(dict(request.data), source='api')
        record = ProblemRecord.objects.create(name=problem.name, problem=problem.to_dict())
        return Response({
            'status': 'success',
            'id': record.id,
            'name': record.name,
            'unitarity_defect': problem.triple.defect,
            'accepted': problem.triple.is_accepted(),
        }, status=status.HTTP_201_CREATED)
    except SpectralError as e:
        logger.warning(f"Rejected problem: {e}")
        return Response({'error': str(e)}, status=_error_status(e))
    except Exception as e:
        logger.error(f"Error in create_problem: {str(e)}", exc_info=True)
        return Response({'error': str(e)}, status=status.HTTP_500_INTERNAL_SERVER_ERROR)


@api_view(['GET', 'POST'])
@authentication_classes([CsrfExemptSessionAuthentication, BasicAuthentication])
@permission_classes([IsAuthenticated])
def problem_runs(request: HttpRequest, problem_id: int):
    """
    GET lists the stored runs of a problem; POST runs check_hadamard or
    find_cycles on it synchronously and stores the report.
    """
    record = get_object_or_404(ProblemRecord, id=problem_id)
    if request.method == 'GET':
        history = list(record.runs.order_by('created_at').values('id', 'subcommand', 'verdict', 'seed', 'created_at'))
        return Response({'status': 'success', 'problem_id': record.id, 'runs': history})

    try:
        subcommand = request.data.get('subcommand')
        if subcommand not in RUNNERS:
            return Response(
                {'error': f"subcommand must be one of {sorted(RUNNERS)}"},
                status=status.HTTP_400_BAD_REQUEST,
            )
        options = request.data.get('options') or {}
        problem = problem_from_dict(record.problem, source=f'record {record.id}')
        report = RUNNERS[subcommand](problem, options)
        run = RunRecord.from_report(report, problem=record)
        return Response({
            'status': 'success',
            'id': run.id,
            'verdict': run.verdict,
            'report': run.report,
        }, status=status.HTTP_201_CREATED)
    except SpectralError as e:
        logger.warning(f"Run on problem {problem_id} failed: {e}")
        return Response({'error': str(e)}, status=_error_status(e))
    except Exception as e:
        logger.error(f"Error in problem_runs: {str(e)}", exc_info=True)
        return Response({'error': str(e)}, status=status.HTTP_500_INTERNAL_SERVER_ERROR)
