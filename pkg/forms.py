from wtforms import Form, FloatField, IntegerField, StringField
from wtforms.validators import AnyOf, InputRequired, NumberRange, Optional, ValidationError


class ConfigForm(Form):
    """Field-level validation of the flat key=value run configuration.

    Problem constraints (1 < p < n and the rest) are checked afterwards by
    validate_params; this form only owns types, ranges and choices.
    """
    n = IntegerField('n', validators=[
        InputRequired(message='n is required'),
        NumberRange(min=2, message='n must be an integer >= 2')
    ])
    p = FloatField('p', validators=[InputRequired(message='p is required')])
    a = FloatField('a', default=0.0, validators=[Optional()])
    b = FloatField('b', default=0.0, validators=[Optional()])
    c = FloatField('c', default=2.0, validators=[Optional()])
    lam = FloatField('lambda', default=None, validators=[Optional()])
    R = FloatField('R', default=1.0, validators=[Optional()])
    nodes = IntegerField('nodes', default=4096, validators=[
        Optional(),
        NumberRange(min=16, message='nodes must be at least 16')
    ])
    ratio = FloatField('ratio', default=None, validators=[Optional()])
    eps_min = FloatField('eps_min', default=1e-6, validators=[Optional()])
    eps_max = FloatField('eps_max', default=1e-2, validators=[Optional()])
    eps_count = IntegerField('eps_count', default=13, validators=[
        Optional(),
        NumberRange(min=1, message='eps_count must be positive')
    ])
    tol = FloatField('tol', default=1e-10, validators=[Optional()])
    max_iters = FloatField('max_iters', default=100000, validators=[Optional()])
    out_dir = StringField('out_dir', default='cknlab-out', validators=[Optional()])
    format = StringField('format', default='json', validators=[
        Optional(),
        AnyOf(['json', 'csv'], message='format must be json or csv')
    ])
    delta = FloatField('delta', default=None, validators=[Optional()])
    workers = IntegerField('workers', default=1, validators=[
        Optional(),
        NumberRange(min=1, message='workers must be at least 1')
    ])

    def validate_R(self, field):
        if field.data is None:
            return
        if not field.data > 0:
            raise ValidationError('R must be positive')

    def validate_ratio(self, field):
        if field.data is None:
            return
        if not field.data > 1.0:
            raise ValidationError('ratio must exceed 1')

    def validate_eps_min(self, field):
        if field.data is None:
            return
        if not field.data > 0:
            raise ValidationError('eps_min must be positive')

    def validate_eps_max(self, field):
        if field.data is None:
            return
        if self.eps_min.data is not None and not field.data > self.eps_min.data:
            raise ValidationError('eps_max must exceed eps_min')

    def validate_tol(self, field):
        if field.data is None:
            return
        if not field.data > 0:
            raise ValidationError('tol must be positive')

    def validate_max_iters(self, field):
        if field.data is None:
            return
        if not (field.data >= 1 and float(field.data).is_integer()):
            raise ValidationError('max_iters must be a positive integer')

    def validate_delta(self, field):
        if field.data is None:
            return
        radius = self.R.data if self.R.data else 1.0
        if not 0 < field.data < radius / 4.0:
            raise ValidationError('delta must lie in (0, R/4)')

    def document(self):
        """Validated values as ConfigDoc keyword arguments"""
        data = dict(self.data)
        data['max_iters'] = int(data['max_iters'])
        return data
