# This file makes the pyFunctions directory a Python package
# Modules are imported directly (models.configs depends on pyFunctions.errors,
# so eager imports here would be circular)
__all__ = [
    'quantum_core',
    'processes',
    'dheom_solver',
    'mc_oracle',
    'rydberg',
    'oracle_check',
]
