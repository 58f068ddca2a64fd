from .core import NotFoundError, StateError, Workspace

__all__ = ["NotFoundError", "StateError", "Workspace"]
