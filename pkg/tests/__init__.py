"""Test suite for zombie-cache-sim."""
