"""Residual units and the U-shaped stack: shapes, skips, determinism."""

import pytest
import torch
from torch import nn

from resunet_backend import ResidualUnit, ResUNet, build_model, view_config

TINY_LEVELS = [(4, 1), (8, 2), (4, 1)]


def record_shapes(units):
    """Attach forward hooks; returns the list they append output shapes to."""
    shapes = []
    for unit in units:
        unit.register_forward_hook(
            lambda _m, _inp, out: shapes.append(tuple(out.shape)))
    return shapes


class TestResidualUnit:
    def test_identity_shortcut_when_shape_is_preserved(self):
        unit = ResidualUnit(16, 16, stride=1)
        assert isinstance(unit.shortcut, nn.Identity)

    @pytest.mark.parametrize("in_ch,out_ch,stride", [
        (16, 32, 1),   # channel change
        (16, 16, 2),   # downsampling
        (8, 4, 2),     # both
    ])
    def test_projection_shortcut_on_shape_change(self, in_ch, out_ch, stride):
        unit = ResidualUnit(in_ch, out_ch, stride=stride)
        assert isinstance(unit.shortcut, nn.Conv2d)
        assert unit.shortcut.kernel_size == (1, 1)
        assert unit.shortcut.stride == (stride, stride)

    def test_output_shape(self):
        unit = ResidualUnit(3, 8, stride=2)
        out = unit(torch.rand(2, 3, 16, 16))
        assert out.shape == (2, 8, 8, 8)

    def test_zeroed_convs_leave_pure_identity(self):
        # With both conv blocks silenced the unit must return its input
        # exactly — the skip really is an identity path.
        unit = ResidualUnit(5, 5, stride=1)
        with torch.no_grad():
            for conv in (unit.conv1, unit.conv2):
                conv.weight.zero_()
                conv.bias.zero_()
        x = torch.randn(3, 5, 9, 9)
        assert torch.equal(unit(x), x)

    def test_bad_stride(self):
        with pytest.raises(ValueError, match="stride"):
            ResidualUnit(4, 4, stride=3)

    def test_preactivation_order(self):
        # Each block normalizes then convolves: bn1 sees the unit's input
        # width, conv2's input width is conv1's output width.
        unit = ResidualUnit(6, 10, stride=1)
        assert unit.bn1.num_features == 6
        assert unit.conv1.in_channels == 6
        assert unit.bn2.num_features == 10
        assert unit.conv2.in_channels == 10


class TestResUNetStructure:
    @pytest.mark.parametrize("levels,message", [
        ([(4, 1), (8, 2)], "odd"),
        ([(4, 1)], "odd"),
        ([(4, 2), (8, 2), (4, 1)], "first level"),
        ([(4, 1), (8, 2), (4, 2)], "decoder"),
        ([(4, 1), (0, 2), (4, 1)], "positive"),
        ([(4, 1), (8, 3), (4, 1)], "strides"),
    ])
    def test_invalid_levels(self, levels, message):
        with pytest.raises(ValueError, match=message):
            ResUNet(levels)

    def test_rejects_non_batch_input(self):
        net = ResUNet(TINY_LEVELS)
        with pytest.raises(ValueError, match="N, C, H, W"):
            net(torch.rand(1, 16, 16))

    def test_tiny_net_shapes(self):
        net = ResUNet(TINY_LEVELS)
        bridge_shapes = record_shapes([net.encoder[1]])
        out = net(torch.rand(2, 1, 16, 16))
        assert out.shape == (2, 1, 16, 16)
        assert bridge_shapes == [(2, 8, 8, 8)]

    def test_view_net_level_schedule(self):
        net = build_model(view_config())
        enc_shapes = record_shapes(net.encoder)
        dec_shapes = record_shapes(net.decoder)
        net(torch.rand(1, 1, 64, 128))
        assert enc_shapes == [
            (1, 64, 64, 128),
            (1, 128, 32, 64),
            (1, 256, 16, 32),
            (1, 512, 8, 16),
        ]
        assert dec_shapes == [
            (1, 256, 16, 32),
            (1, 128, 32, 64),
            (1, 64, 64, 128),
        ]

    def test_decoder_units_consume_concatenated_skips(self):
        net = build_model(view_config())
        # Upsampled bottom (512) + encoder level 3 skip (256), and so on up.
        assert [u.conv1.in_channels for u in net.decoder] == [768, 384, 192]
        assert net.head.kernel_size == (1, 1)
        assert net.head.out_channels == 1


class TestForwardBehavior:
    def test_outputs_are_probabilities(self):
        net = ResUNet(TINY_LEVELS)
        with torch.no_grad():
            out = net(torch.randn(4, 1, 16, 16) * 10)
        assert float(out.min()) >= 0.0
        assert float(out.max()) <= 1.0

    def test_eval_mode_rows_are_batch_independent(self):
        torch.manual_seed(3)
        net = ResUNet(TINY_LEVELS)
        net.eval()
        a, b = torch.rand(1, 1, 16, 16), torch.rand(1, 1, 16, 16)
        with torch.no_grad():
            both = net(torch.cat([a, b]))
            alone_a, alone_b = net(a), net(b)
        assert torch.allclose(both[0], alone_a[0], atol=1e-6)
        assert torch.allclose(both[1], alone_b[0], atol=1e-6)

    def test_seeded_init_is_deterministic(self):
        torch.manual_seed(42)
        first = build_model(view_config()).state_dict()
        torch.manual_seed(42)
        second = build_model(view_config()).state_dict()
        assert first.keys() == second.keys()
        assert all(torch.equal(first[k], second[k]) for k in first)
