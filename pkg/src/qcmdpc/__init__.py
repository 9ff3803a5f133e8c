"""QC-MDPC McEliece workbench: ring arithmetic, decoders, density evolution,
and reaction-attack experiments."""

__version__ = "0.1.0"
