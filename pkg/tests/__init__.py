"""Tests for the kgsym package."""
