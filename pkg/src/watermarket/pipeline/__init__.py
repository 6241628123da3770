"""Scenario orchestration."""
