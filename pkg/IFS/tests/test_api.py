from django.contrib.auth import get_user_model
from django.test import TestCase
from django.urls import reverse
from rest_framework.test import APIClient

from IFS.models import ProblemRecord, RunRecord

from .helpers import load_problem


class ProblemApiTests(TestCase):

    def setUp(self):
        self.client = APIClient()
        self.user = get_user_model().objects.create_user(username='analyst', password='secret')
        self.client.force_authenticate(user=self.user)

    def create(self, name='example51'):
        response = self.client.post(reverse('create_problem'), load_problem(name).to_dict(), format='json')
        self.assertEqual(response.status_code, 201, response.data)
        return response.data['id']

    def test_create_problem(self):
        response = self.client.post(reverse('create_problem'), load_problem('example51').to_dict(), format='json')
        self.assertEqual(response.status_code, 201)
        self.assertTrue(response.data['accepted'])
        self.assertLess(response.data['unitarity_defect'], 1e-12)
        record = ProblemRecord.objects.get(id=response.data['id'])
        self.assertEqual(record.problem['L'], [[0, 0], [2, 0], [2, 1], [0, 5]])

    def test_invalid_problem_is_rejected(self):
        response = self.client.post(reverse('create_problem'), {'R': [[1]], 'B': [[0]], 'L': [[0]]}, format='json')
        self.assertEqual(response.status_code, 400)
        self.assertIn('not expanding', response.data['error'])
        self.assertFalse(ProblemRecord.objects.exists())

    def test_non_object_body(self):
        response = self.client.post(reverse('create_problem'), [1, 2], format='json')
        self.assertEqual(response.status_code, 400)

    def test_run_check_hadamard(self):
        problem_id = self.create()
        url = reverse('problem_runs', args=[problem_id])
        response = self.client.post(url, {'subcommand': 'check_hadamard'}, format='json')
        self.assertEqual(response.status_code, 201)
        self.assertEqual(response.data['verdict'], 'PASS')
        self.assertIn('partition', response.data['report']['results'])

        history = self.client.get(url)
        self.assertEqual(history.status_code, 200)
        self.assertEqual([run['subcommand'] for run in history.data['runs']], ['check_hadamard'])

    def test_run_find_cycles_with_options(self):
        problem_id = self.create()
        response = self.client.post(reverse('problem_runs', args=[problem_id]),
                                    {'subcommand': 'find_cycles', 'options': {'m_max': 2}}, format='json')
        self.assertEqual(response.status_code, 201)
        self.assertEqual(response.data['report']['inputs']['m_max'], 2)
        self.assertEqual(RunRecord.objects.get().problem_id, problem_id)

    def test_failing_triple_is_stored_with_fail(self):
        problem_id = self.create('example51_broken')
        response = self.client.post(reverse('problem_runs', args=[problem_id]),
                                    {'subcommand': 'check_hadamard'}, format='json')
        self.assertEqual(response.status_code, 201)
        self.assertEqual(response.data['verdict'], 'FAIL')

    def test_unknown_subcommand(self):
        problem_id = self.create()
        response = self.client.post(reverse('problem_runs', args=[problem_id]), {'subcommand': 'example51'},
                                    format='json')
        self.assertEqual(response.status_code, 400)

    def test_invalid_option_value(self):
        problem_id = self.create()
        response = self.client.post(reverse('problem_runs', args=[problem_id]),
                                    {'subcommand': 'find_cycles', 'options': {'m_max': 0}}, format='json')
        self.assertEqual(response.status_code, 400)

    def test_unknown_problem(self):
        response = self.client.get(reverse('problem_runs', args=[999]))
        self.assertEqual(response.status_code, 404)

    def test_authentication_required(self):
        response = APIClient().post(reverse('create_problem'), load_problem('example51').to_dict(), format='json')
        self.assertIn(response.status_code, (401, 403))
