"""Ranging success probability of automotive radar under Poisson interference."""
