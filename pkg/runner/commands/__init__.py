"""Command groups registered on the runner CLI."""
