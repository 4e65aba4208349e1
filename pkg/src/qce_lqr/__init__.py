"""Quantized certainty-equivalent LQR over a rate-limited uplink."""
