"""polyembed: metric polygons, tripodal plane embeddings, and distortion tools."""

__version__ = "0.1.0"
