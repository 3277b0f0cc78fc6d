"""notemotion: an animated music notation engine.

Parses GUIDO-notation fragments, lays them out as vector glyphs, places them
in an OSC-addressable scene graph, animates per-performer cursors under a
rational time model, and renders SVG frames plus a live state feed for the
browser display.
"""

__version__ = "0.1.0"
