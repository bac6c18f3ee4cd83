"""Missing Frobenius trace groups in GL2 and the elliptic curves they classify."""

__version__ = "0.1.0"
