"""
Custom exceptions package for the trike control toolkit.
"""
