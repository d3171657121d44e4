"""Phase-space (discrete and generalized Wigner function) probes of quantum phase transitions in spin chains."""

__version__ = "0.1.0"
