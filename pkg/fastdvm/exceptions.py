"""
Error types raised by the solver, with the CLI exit code of each class
"""
from typing import Optional


class FastDVMError(Exception):
    """Base error; `kind` names the failure, `exit_code` is used by the CLI"""

    exit_code = 1
    default_kind = "error"

    def __init__(self, message: str, kind: Optional[str] = None):
        super().__init__(message)
        self.kind = kind or self.default_kind

    def __str__(self) -> str:
        return f"[{self.kind}] {super().__str__()}"


class ConfigError(FastDVMError, ValueError):
    """Invalid parameters: config files, grid truncations, table/grid mismatches"""

    exit_code = 2
    default_kind = "config"


class NumericalError(FastDVMError, ArithmeticError):
    """Runtime numerical failure: non-finite fields, inconsistent spectra"""

    exit_code = 3
    default_kind = "numerical"


class BudgetExceededError(FastDVMError):
    """Wall-clock budget exhausted"""

    exit_code = 4
    default_kind = "budget-exceeded"
