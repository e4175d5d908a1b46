from django import forms

from .exceptions import ValidationError as SpectralValidationError
from .lattice_service import DigitSet, ExpandingMatrix, UnimodularMatrix

# Keys a problem file may carry under "params"; each overrides a command-line default.
PARAM_KEYS = {
    'spectrum_depth': int,
    'lambda1_depth': int,
    'product_depth': int,
    'cycle_max_len': int,
    'paths': int,
    'steps': int,
    'seed': int,
    'tol_unitary': float,
    'tol_certify': float,
}


class ProblemForm(forms.Form):
    """Validates a problem file: an expanding R with digit sets B and L and optional conjugation M."""
    name = forms.CharField(required=False, max_length=200)
    dimension = forms.IntegerField(required=False, min_value=1)
    R = forms.JSONField(error_messages={'required': 'R is required (an expanding integer matrix)'})
    B = forms.JSONField(error_messages={'required': 'B is required (a list of integer vectors containing 0)'})
    L = forms.JSONField(error_messages={'required': 'L is required (a list of integer vectors containing 0)'})
    M = forms.JSONField(required=False)
    params = forms.JSONField(required=False)

    def clean_R(self):
        rows = self.cleaned_data.get('R')
        if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
            raise forms.ValidationError('R must be a nonempty list of rows.')
        try:
            return ExpandingMatrix(rows)
        except SpectralValidationError as e:
            raise forms.ValidationError(str(e))

    def _clean_digits(self, field, role):
        vectors = self.cleaned_data.get(field)
        if not isinstance(vectors, list) or not all(isinstance(v, list) for v in vectors):
            raise forms.ValidationError(f'{role} must be a list of integer vectors.')
        try:
            return DigitSet(vectors, role)
        except SpectralValidationError as e:
            raise forms.ValidationError(str(e))

    def clean_B(self):
        return self._clean_digits('B', 'B')

    def clean_L(self):
        return self._clean_digits('L', 'L')

    def clean_M(self):
        rows = self.cleaned_data.get('M')
        if rows in (None, '', []):
            return None
        try:
            return UnimodularMatrix(rows)
        except SpectralValidationError as e:
            raise forms.ValidationError(str(e))

    def clean_params(self):
        params = self.cleaned_data.get('params') or {}
        if not isinstance(params, dict):
            raise forms.ValidationError('params must be an object.')
        unknown = sorted(set(params) - set(PARAM_KEYS))
        if unknown:
            raise forms.ValidationError(f'Unknown params {unknown}; allowed: {sorted(PARAM_KEYS)}.')
        try:
            return {key: PARAM_KEYS[key](value) for key, value in params.items()}
        except (TypeError, ValueError) as e:
            raise forms.ValidationError(f'Invalid params value: {e}')

    def clean(self):
        cleaned_data = super().clean()
        R, B, L = cleaned_data.get('R'), cleaned_data.get('B'), cleaned_data.get('L')
        M = cleaned_data.get('M')
        dimension = cleaned_data.get('dimension')

        if R is not None and dimension is not None and R.dim != dimension:
            raise forms.ValidationError(f'dimension is {dimension} but R is {R.dim}×{R.dim}.')
        if R is not None:
            for role, digits in (('B', B), ('L', L)):
                if digits is not None and digits.dim != R.dim:
                    raise forms.ValidationError(f'{role} lives in dimension {digits.dim} but R is {R.dim}×{R.dim}.')
            if M is not None and M.dim != R.dim:
                raise forms.ValidationError(f'M is {M.dim}×{M.dim} but R is {R.dim}×{R.dim}.')
        if B is not None and L is not None and len(B) != len(L):
            raise forms.ValidationError(f'#B = #L required, got #B = {len(B)} and #L = {len(L)}.')
        return cleaned_data
