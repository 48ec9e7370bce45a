"""Background quality metrics and report files."""
