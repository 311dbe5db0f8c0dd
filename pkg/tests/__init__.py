"""Test suite for islandcg."""
