"""Exact point counts and Hecke algebra checks for Lusztig varieties of GL_n and SL_n over prime fields."""

__version__ = "0.1.0"
