"""Frame types and low-level image operations."""
