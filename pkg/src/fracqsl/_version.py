"""Single source for the package version string used in sweep metadata."""

VERSION = "0.1.0"
