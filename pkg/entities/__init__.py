"""
Entities package for specreg: spectral operators, index functions and filter families
"""
