import os

import numpy as np

from fbgru.dataio import marker_layout, read_dataset
from fbgru.features import backward_init_index, bce_loss, build_windows


def test_window_parity_with_toolkit_fixtures(fixture_dir):
    """Independent C/D construction matches the toolkit's to 1e-12."""
    blocks, records = read_dataset(os.path.join(fixture_dir, "parity.ds"))
    ref = np.load(os.path.join(fixture_dir, "parity_features.npz"))
    assert len(records) == ref["C"].shape[0]
    for i, (bi, y_bits, r) in enumerate(records):
        c, d = build_windows(r, blocks[bi])
        assert np.abs(c - ref["C"][i]).max() <= 1e-12
        assert np.abs(d - ref["D"][i]).max() <= 1e-12
        assert backward_init_index(len(r), blocks[bi].sent_length,
                                   blocks[bi].delta) == ref["binit"][i]


def test_loss_parity_with_toolkit_fixtures(fixture_dir):
    ref = np.load(os.path.join(fixture_dir, "parity_features.npz"))
    for y, o, expect in zip(ref["bce_y"], ref["bce_o"], ref["bce_loss"]):
        assert abs(bce_loss(y, o) - expect) <= 1e-12


def test_info_positions_have_neutral_first_half(fixture_dir):
    blocks, records = read_dataset(os.path.join(fixture_dir, "parity.ds"))
    bi, y_bits, r = records[0]
    c, d = build_windows(r, blocks[bi])
    is_marker, _ = marker_layout(blocks[bi])
    feats = 1.0 / (1.0 + np.exp(6.0 * c))  # sigmoid(w_c * C) at w_c = -6
    assert np.allclose(feats[~is_marker], 0.5)


def test_feature_matrix_shape_for_c1(fixture_dir):
    blocks, records = read_dataset(os.path.join(fixture_dir, "parity.ds"))
    bi, y_bits, r = records[0]
    c, d = build_windows(r, blocks[bi])
    stacked = np.concatenate([c, d], axis=1)
    assert stacked.shape == (363, 70)
    assert len(y_bits) == 363


def test_hard_channel_mapping():
    from fbgru.features import map_symbols
    assert (map_symbols(np.array([0, 1, 1, 0], dtype=np.uint8), "ids")
            == np.array([1.0, -1.0, -1.0, 1.0])).all()
