"""Sample project for SBOM generation."""
import numpy as np

__version__ = "0.1.0"


def main():
    print(np.arange(3).sum())
