# Optomechanical composite phase-sequence toolkit
__version__ = "0.1.0"
