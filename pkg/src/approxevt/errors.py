"""Exception types.  Each carries the exit code the CLI reports for it."""


class ApproxEVTError(Exception):
    exit_code = 1


class ConfigInvalid(ApproxEVTError):
    exit_code = 2


class CapExceeded(ApproxEVTError):
    exit_code = 3

    def __init__(self, count_bound: int, cap: int, what: str = "enumeration"):
        super().__init__(f"{what} needs up to {count_bound} items, cap is {cap}")
        self.count_bound = count_bound
        self.cap = cap


class NotCovered(ApproxEVTError):
    exit_code = 4


class StateEscape(ApproxEVTError):
    exit_code = 5

    def __init__(self, step: int, state):
        super().__init__(f"state left the admissible box at step {step}: {state}")
        self.step = step
        self.state = state


class MaxIterExceeded(ApproxEVTError):
    exit_code = 6

    def __init__(self, iterations: int, residual):
        super().__init__(f"no convergence after {iterations} iterations (last change {residual})")
        self.iterations = iterations
        self.residual = residual


class NoContraction(ApproxEVTError):
    exit_code = 7

    def __init__(self, ratio):
        super().__init__(f"empirical contraction ratio {ratio} >= 1")
        self.ratio = ratio


class IncompatibleValues(ApproxEVTError):
    exit_code = 8


class DegenerateDiscount(ApproxEVTError):
    exit_code = 9


class DivergentRollout(ApproxEVTError):
    exit_code = 10


class DomainInset(ApproxEVTError):
    exit_code = 11


class EmptySet(ApproxEVTError):
    exit_code = 12
