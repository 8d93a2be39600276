"""
Core package for specreg: settings, errors, config and the experiment runner
"""
