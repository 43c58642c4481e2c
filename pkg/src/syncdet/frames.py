"""End-to-end frame simulation: message -> codeword -> markers -> channel."""

import os
from dataclasses import dataclass

import numpy as np

from . import ldpc
from .channels import Frame, transmit
from .markers import MarkerScheme, PositionMap, build_position_map

ASSET_DIR = os.path.join(os.path.dirname(__file__), "assets")
CODE_FILES = {
    "c1": "c1_273_191.alist",
    "c2": "c2_648_540.alist",
    "hamming74": "hamming_7_4.alist",
}
DEFAULT_DELTA = 17


@dataclass
class CodeAssets:
    """Everything frame generation and decoding need for one code."""

    name: str
    h: ldpc.ParityCheckMatrix
    encoder: ldpc.Encoder
    scheme: MarkerScheme
    pmap: PositionMap

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def k(self) -> int:
        return self.encoder.k

    @property
    def y(self) -> int:
        return self.pmap.y


def load_code(name: str, scheme: MarkerScheme = None) -> CodeAssets:
    """Load a registered code id ('c1', 'c2', ...) or an alist file path."""
    scheme = scheme or MarkerScheme()
    path = os.path.join(ASSET_DIR, CODE_FILES[name]) if name in CODE_FILES else name
    with open(path, encoding="utf-8") as fh:
        h = ldpc.parse_alist(fh.read())
    enc = ldpc.derive_encoder(h)
    pmap = build_position_map(h.n, scheme)
    return CodeAssets(name=name, h=h, encoder=enc, scheme=scheme, pmap=pmap)


def simulate_frame(assets: CodeAssets, params, kind: str, rng: np.random.Generator) -> Frame:
    """Draw a message, encode, frame with markers and transmit."""
    u = rng.integers(0, 2, size=assets.k, dtype=np.uint8)
    x = assets.encoder.encode(u)
    y_bits = assets.pmap.marker_bits.copy()
    y_bits[~assets.pmap.is_marker] = x
    r, log = transmit(y_bits, params, rng, kind)
    return Frame(u=u, x=x, y_bits=y_bits, r=r, log=log)
