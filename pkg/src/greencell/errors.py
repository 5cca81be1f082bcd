"""Exception hierarchy shared by every module."""


class GreencellError(Exception):
    pass


class UncoveredUser(GreencellError):
    def __init__(self, user: int):
        super().__init__(f"user {user} lies inside no station's coverage disk")
        self.user = user


class CapacityInfeasible(GreencellError):
    pass


class NotInCoverage(GreencellError):
    pass


class InvalidDecision(GreencellError):
    pass


class NonIntegralSolution(GreencellError):
    pass


class NumericalFailure(GreencellError):
    pass


class SolverFailed(GreencellError):
    def __init__(self, status, message: str = ""):
        super().__init__(f"solver returned {status}" + (f": {message}" if message else ""))
        self.status = status


class AssignmentInfeasible(GreencellError):
    pass


class TooLarge(GreencellError):
    pass


class OracleInfeasible(GreencellError):
    pass


class ExperimentAborted(GreencellError):
    pass
