"""
Runner package initialization.

This package exposes the batch command-line front-end in `cli.py`.
Environment defaults (output directory, tracing switch) are read from a
local .env file when present.
"""
from dotenv import load_dotenv

load_dotenv()
