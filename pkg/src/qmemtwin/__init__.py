"""Digital twin of atomic-ensemble quantum memories on truncated Fock spaces."""

__version__ = "0.1.0"
