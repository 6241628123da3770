"""Parameter fitting against yield observations and monthly market data."""
