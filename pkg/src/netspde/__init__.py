"""Stochastic reaction-diffusion equations on metric graphs with dynamic Kirchhoff vertex conditions."""
