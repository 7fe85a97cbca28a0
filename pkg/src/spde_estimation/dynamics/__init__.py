"""Coefficient fields, space-time noise, SPDE steppers and observations."""
