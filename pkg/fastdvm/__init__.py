"""
Fast discrete velocity models of the Boltzmann collision operator
"""
__version__ = "1.0.0"
