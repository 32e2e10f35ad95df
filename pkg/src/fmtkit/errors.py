"""Exception hierarchy shared by every fmtkit module."""
from __future__ import annotations


class FmtkitError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class InputError(FmtkitError):
    """Malformed input: bad syntax, bad sorts, unknown names."""


class FormulaSyntaxError(InputError):
    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        self.text = text
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class SortError(InputError):
    def __init__(self, message: str, symbol: str | None = None, pos: int | None = None):
        self.symbol = symbol
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class UnknownSymbol(InputError):
    def __init__(self, symbol: str, pos: int | None = None):
        self.symbol = symbol
        self.pos = pos
        msg = f"unknown symbol {symbol!r}"
        if pos is not None:
            msg += f" at position {pos}"
        super().__init__(msg)


class FreeVarUnassigned(InputError):
    def __init__(self, var: str):
        self.var = var
        super().__init__(f"free variable {var!r} has no value")


class NotSubvocabulary(InputError):
    pass


class VocabularyMismatch(InputError):
    pass


class NotWellFounded(FmtkitError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(f"relation has a cycle through {self.cycle!r}")


class NotExtensional(FmtkitError):
    def __init__(self, a, b):
        self.pair = (a, b)
        super().__init__(f"atoms {a!r} and {b!r} have the same predecessors")


class PreconditionFailed(InputError):
    pass


class BoundMissing(InputError):
    pass


class InconsistentDelta(FmtkitError):
    def __init__(self, sigma_found: bool, pi_found: bool):
        self.sigma_found = sigma_found
        self.pi_found = pi_found
        which = "both" if sigma_found else "neither"
        super().__init__(f"{which} of the sigma/pi searches produced a witness")


class UnknownConstruction(InputError):
    pass


class EmptyDomain(FmtkitError):
    pass


class ResourceCapExceeded(FmtkitError):
    def __init__(self, what: str, cap: int):
        self.what = what
        self.cap = cap
        super().__init__(f"{what} exceeds the resource cap of {cap}")
