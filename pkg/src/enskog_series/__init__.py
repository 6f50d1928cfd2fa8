"""Hard-sphere dynamics and the regularised weak series for the Boltzmann-Enskog hierarchy."""

__version__ = "0.1.0"
