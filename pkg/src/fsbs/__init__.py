"""Functional seeded binary segmentation for discretely observed functional time series."""
