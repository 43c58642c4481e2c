"""Marker-code detection toolkit for insertion/deletion channels.

Provides the exact forward-backward drift-lattice detector, the trainable
unfolded detector (13 scalar weights), a sum-product LDPC codec, channel
simulators, dataset I/O and a Monte-Carlo BER harness with a CLI front end.
"""

__version__ = "0.1.0"

from .channels import BurstChannelParams, ChannelParams
from .ldpc import ParityCheckMatrix, parse_alist
from .markers import MarkerScheme

__all__ = [
    "BurstChannelParams",
    "ChannelParams",
    "MarkerScheme",
    "ParityCheckMatrix",
    "parse_alist",
]
