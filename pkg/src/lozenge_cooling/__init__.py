"""Zero-threshold flip cooling of lozenge tilings."""
__version__ = "0.1.0"
