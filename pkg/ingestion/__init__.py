"""Frame sequence loading and synthetic sequence generation."""
