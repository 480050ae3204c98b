"""Artifact and manifest persistence."""
