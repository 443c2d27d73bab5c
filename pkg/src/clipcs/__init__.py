"""Clipping-based PAPR reduction for OFDM with compressive-sensing clipper recovery."""
