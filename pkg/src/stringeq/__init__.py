"""String equations, Gel'fand-Dickey hierarchies, integrable Wronskian
kernels and their Fredholm determinants."""

__version__ = "0.1.0"
