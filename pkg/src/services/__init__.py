"""
Services package containing the maniplex, voltage and polytopality engines.
"""
