"""
Analysis package for specreg
"""
