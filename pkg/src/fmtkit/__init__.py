"""Finite model theory toolkit: strong-logic evaluation, bounded projections
and hereditarily finite set constructions."""
from importlib import import_module

__version__ = "0.1.0"

# resolved on first access so that importing one submodule does not pull in the rest
_EXPORTS = {
    "FmtkitError": "errors",
    "InputError": "errors",
    "ResourceCapExceeded": "errors",
    "Structure": "structures",
    "Vocabulary": "structures",
    "analyze": "formula",
    "are_isomorphic": "structures",
    "enumerate_structures": "structures",
    "evaluate": "semantics",
    "find_models": "semantics",
    "parse": "formula",
    "reduct": "structures",
    "satisfies": "semantics",
    "to_text": "formula",
    "upward_extension_probe": "semantics",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'fmtkit' has no attribute {name!r}")
    value = getattr(import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(list(globals()) + __all__)
