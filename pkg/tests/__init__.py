"""
Test Suite for nullgeo

Includes:
- Unit tests for the expression calculus and geometry modules
- Property-based tests for parsing and differentiation
- Integration tests running identity suites on built-in fixtures
"""
