"""Kalman-Bucy, ensemble Kalman-Bucy and dual filters."""
