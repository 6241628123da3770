"""CSV tables and report files."""
