"""
Models package for maniplexes, premaniplexes, group elements and reports.
"""
