"""Exceptions that separate bad configuration from failed numerics."""


class QualityError(RuntimeError):
    """A numerical quality gate failed (SE cap, PSD repair, underflow)."""
