"""
nullgeo

Numerical verification engine for lightlike hypersurface geometry.
Builds the induced degenerate-metric objects, Weyl screen connections and
their curvatures from chart data, then checks closed-form identities against
independent brute-force evaluations.
"""

__version__ = "1.0.0"
