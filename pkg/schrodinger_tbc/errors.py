# Copyright (c) 2026 The schrodinger-tbc authors.
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom
# the Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE
# AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE


class SolverException(Exception):
    pass


class ConfigurationError(SolverException):
    def __init__(self, description, key=None):
        self.key = key
        self.description = description or ""
        super(ConfigurationError, self).__init__(self.description)


class MeshMismatchError(SolverException):
    pass


class NumericalError(SolverException):
    def __init__(self, description, q=None, m=None):
        self.q = q
        self.m = m
        self.description = description or ""
        super(NumericalError, self).__init__(self._message())

    def _message(self):
        where = []
        if self.q is not None:
            where.append("mode q={}".format(self.q))
        if self.m is not None:
            where.append("level m={}".format(self.m))
        if where:
            return "{} ({})".format(self.description, ", ".join(where))
        return self.description


class CoefficientError(NumericalError):
    pass


class TridiagonalSolveError(NumericalError):
    pass


class BoundaryViolationError(NumericalError):
    pass


class OutputError(SolverException):
    def __init__(self, description, path=None):
        self.path = path
        self.description = description or ""
        super(OutputError, self).__init__(self.description)
