"""Fractional-time queues driven by Mittag-Leffler waiting times."""
