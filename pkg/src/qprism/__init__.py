"""qprism: exact computer algebra for truncated q-crystalline base rings,
divided delta-envelopes, q-Higgs complexes, and their cohomology."""

from .base import BaseRing, BaseElt, Witt2Elt, witt2_of

__all__ = ["BaseRing", "BaseElt", "Witt2Elt", "witt2_of"]

__version__ = "0.1.0"
