"""Hierarchical finite state controllers for generalized planning."""
