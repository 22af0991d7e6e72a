"""
Version management for the axisymmetric Hall-MHD lab.
"""

import os

from src import __version__

SERVICE_NAME = "axisym-hall-lab"


def get_version():
    """Get the current version of the lab."""
    return __version__


def get_version_info():
    """Get detailed version information.

    Contains no build timestamp, so summaries that embed it stay byte-reproducible.
    """
    return {
        "version": __version__,
        "environment": os.environ.get("LAB_ENV", "development"),
        "service": SERVICE_NAME,
    }
