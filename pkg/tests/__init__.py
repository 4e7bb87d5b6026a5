"""Test package for edgetune."""
