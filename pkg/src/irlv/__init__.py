"""In-region location verification toolkit.

Synthesizes wireless attenuation data over urban scenarios, trains a
neural-network verifier, compares it against the Neyman-Pearson test where
that test is tractable, and searches for good base-station placements.
"""

__version__ = "0.1.0"
