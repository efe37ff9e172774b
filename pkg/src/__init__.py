"""Inexact inertial ADMM package"""

__version__ = "1.0.0"
__description__ = "Relative-error inexact inertial ADMM with rate diagnostics and a LASSO benchmark harness"
