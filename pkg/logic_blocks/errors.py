# logic_blocks/errors.py
"""
Exception hierarchy shared by the lattice, codebook, detector and analysis blocks.

Everything derives from ValueError so callers that only know about bad input
(the CLI, the config parser) can keep catching ValueError.
"""


class SLMError(ValueError):
    """Base class for every error raised by logic_blocks."""


class ParameterError(SLMError):
    """A construction parameter is out of range (odd M, wrong bit length, ...)."""


class UnsupportedDimensionError(SLMError):
    """Dimension beyond what the exact lattice routines support."""


class ConfigurationError(SLMError):
    """Incompatible combination, e.g. DnFast on a non-D_n lattice or LSD on a baseline codebook."""


class DomainError(SLMError):
    """Argument outside the mathematical domain (d^2 <= 0, nonpositive noise variance)."""
