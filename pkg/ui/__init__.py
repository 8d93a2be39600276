"""
UI package for specreg
"""
