"""
Test package for MuskatLab.

This package contains unit tests and integration tests
for the MuskatLab numerical core, configuration and harness.
"""
