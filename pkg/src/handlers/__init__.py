"""
Command-line handlers package.
"""
