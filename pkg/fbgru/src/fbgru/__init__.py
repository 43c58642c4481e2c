"""Data-driven bi-GRU detector for marker codes over insertion/deletion
channels.

Consumes SYNCDET-DATASET v1 files for training/testing and hands its
per-position LLRs to the detection toolkit's CLI for LDPC decoding and BER
accounting.
"""

__version__ = "0.1.0"
