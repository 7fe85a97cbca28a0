"""Pydantic models for fields, states, filters and inference results."""
