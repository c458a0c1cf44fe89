"""
Core models package for the Zeno vacuum-scissors simulator.

This package contains the cascade geometry, probe specifications, joint-state
results and the command-line experiment configuration.
"""
