"""Market mechanisms: HARA utility, common-pool clearing, pair-wise trading and matching."""
