"""Exception hierarchy shared by the lab modules and the command line."""


class CknLabError(Exception):
    """Base class for every error raised by the laboratory"""

    exit_code = 1


class ParameterError(CknLabError, ValueError):
    """Problem parameters violate one of the admissibility constraints"""

    constraint = ''

    def __init__(self, message):
        super().__init__(f"{self.constraint}: {message}" if self.constraint else message)


class PRangeError(ParameterError):
    constraint = '1 < p < n'


class ARangeError(ParameterError):
    constraint = 'a < (n-p)/p'


class BRangeError(ParameterError):
    constraint = 'a <= b <= a+1'


class CPositivityError(ParameterError):
    constraint = 'c > 0'


class UnsupportedParameterError(ParameterError):
    """Valid parameters that the requested operation cannot handle (Hardy endpoint d=0)"""

    constraint = 'd > 0'


class ConfigError(CknLabError):
    """Configuration text or flags could not be turned into a valid ConfigDoc"""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__('; '.join(self.messages))


class GridError(CknLabError, ValueError):
    pass


class IntegrabilityError(CknLabError, ValueError):
    pass


class FitError(CknLabError, ValueError):
    pass


class ConvergenceError(CknLabError):
    """Iterative method stopped without meeting its acceptance test"""

    exit_code = 2

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NonpositiveQuotientError(ConvergenceError):
    pass


class ConcentrationDetected(ConvergenceError):
    pass


class OutputError(CknLabError):
    exit_code = 3


class LambdaSignError(ParameterError):
    constraint = 'lambda <= 0'
