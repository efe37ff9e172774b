"""Test package for the inexact inertial ADMM solver."""
