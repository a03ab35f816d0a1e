"""paritylab: qudit parity-determination algorithm and its photonic d = 4 model."""

__version__ = "0.1.0"
