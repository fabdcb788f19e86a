"""Executable continuous-logic checks for amenability and Kazhdan-type conditions."""

__version__ = "0.1.0"
