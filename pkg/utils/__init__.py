"""
Shared utilities: error handling, file I/O and report formatting.
"""
