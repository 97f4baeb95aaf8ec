"""Test package for Resume project."""
