"""Welfare aggregation and numerical checks of the common-pool efficiency claims."""
