"""Baseband simulator of a 5.8 GHz FHSS/PN-code vehicular radar and
communication radio with two-antenna space diversity."""

__version__ = "0.1.0"
