class ToolkitError(Exception):
    """
    Base error of the toolkit. `exit_code` is what the command line reports,
    `witness` optionally names the point (or index) that triggered the error.
    """
    exit_code = 1
    name = 'Toolkit Error'

    def __init__(self, message, witness=None, errors=None):
        super().__init__(message)
        self.message = message
        self.witness = witness
        self.errors = errors

    def json(self):
        data = {'error': self.name, 'message': self.message}
        if self.witness is not None:
            data['witness'] = self.witness
        if self.errors:
            data['errors'] = self.errors
        return data


class InputError(ToolkitError):
    exit_code = 2
    name = 'Input Error'


class DomainError(ToolkitError):
    """Evaluation requested at a point where the function is +inf."""
    exit_code = 2
    name = 'Domain Error'


class ImproperFunctionError(ToolkitError):
    exit_code = 2
    name = 'Improper Function'


class PreconditionError(ToolkitError):
    name = 'Precondition Violated'


class CoverageError(ToolkitError):
    name = 'Coverage Error'


class UnsupportedProbeError(ToolkitError):
    exit_code = 2
    name = 'Unsupported Probe'


class EmptySubdifferentialError(ToolkitError):
    name = 'Empty Subdifferential'


class NumericalError(ToolkitError):
    name = 'Numerical Error'


class HypothesisScaleMismatch(ToolkitError):
    name = 'Hypothesis Scale Mismatch'
