"""Quantized position-weight-matrix features for spike detection."""
