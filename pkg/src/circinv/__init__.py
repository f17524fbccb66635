"""Inverses of Toeplitz matrices with Gegenbauer-type singular symbols."""

__version__ = "0.1.0"
