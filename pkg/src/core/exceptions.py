"""
Error hierarchy shared by the engines, the scenario loader and the CLI.

ScenarioError subclasses are input faults (exit code 1); ComputationError
subclasses come out of the engines (exit code 2).
"""
from typing import Optional


class CoalitionError(Exception):
    exit_code = 2


class ScenarioError(CoalitionError):
    exit_code = 1


class ScenarioFileNotFound(ScenarioError):
    def __init__(self, path: str):
        super().__init__(f"Scenario file not found: {path}")
        self.path = path


class ScenarioParseError(ScenarioError):
    def __init__(self, path: str, line: int, column: int, reason: str):
        super().__init__(f"Cannot parse {path} at line {line}, column {column}: {reason}")
        self.path = path
        self.line = line
        self.column = column


class ScenarioValidationError(ScenarioError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"Invalid field '{field}': {reason}")
        self.field = field
        self.reason = reason


class ComputationError(CoalitionError):
    exit_code = 2
    operation: Optional[str] = None

    def __init__(self, message: str, operation: Optional[str] = None):
        super().__init__(message)
        if operation is not None:
            self.operation = operation


class EmptyRoster(ComputationError):
    operation = "make_game"


class TooManyPlayers(ComputationError):
    operation = "make_game"


class InvalidParameter(ComputationError):
    operation = "make_game"


class InvalidCoalition(ComputationError):
    operation = "worth"


class TooLargeForExact(ComputationError):
    operation = "shapley_exact"


class TooLargeForEnumeration(ComputationError):
    pass


class ZeroSamples(ComputationError):
    operation = "shapley_montecarlo"


class LengthMismatch(ComputationError):
    pass


class NumericalFailure(ComputationError):
    operation = "core_nonempty"


class InvalidStructure(ComputationError):
    operation = "provider_deviation"


class BlockTooLarge(ComputationError):
    operation = "peer_payoffs"


class OutputPathError(ScenarioError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot write {path}: {reason}")
        self.path = path
