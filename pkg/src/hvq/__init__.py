"""Hidden-variable polarization models, Bell bounds, phase operators and in/out scattering tools."""

__version__ = "0.1.0"
