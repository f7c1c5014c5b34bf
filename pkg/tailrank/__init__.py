# Tail-singular-value regularized multi-label learning
__version__ = "1.0.0"
