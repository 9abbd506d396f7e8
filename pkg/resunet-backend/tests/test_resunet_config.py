"""NetConfig: the two shipped tables, frozen field-for-field."""

import dataclasses

import pytest

from resunet_backend import LevelSpec, NetConfig, axial_config, view_config

AXIAL_TABLE = [
    (64, 1), (128, 2), (256, 2), (512, 2), (1024, 2),
    (512, 1), (256, 1), (128, 1), (64, 1),
]
VIEW_TABLE = [
    (64, 1), (128, 2), (256, 2), (512, 2),
    (256, 1), (128, 1), (64, 1),
]


class TestCanonicalTables:
    def test_axial_levels(self):
        cfg = axial_config()
        assert [(l.filters, l.first_stride) for l in cfg.levels] == AXIAL_TABLE
        assert cfg.view == "axial"
        assert cfg.n_levels == 9
        assert cfg.bridge_index == 4
        assert cfg.levels[cfg.bridge_index].filters == 1024
        assert cfg.input_hw == (128, 128)

    def test_view_levels(self):
        cfg = view_config()
        assert [(l.filters, l.first_stride) for l in cfg.levels] == VIEW_TABLE
        assert cfg.view == "coronal-sagittal"
        assert cfg.n_levels == 7
        assert cfg.bridge_index == 3
        assert cfg.levels[cfg.bridge_index].filters == 512
        assert cfg.input_hw == (64, 128)

    def test_training_defaults(self):
        for cfg in (axial_config(), view_config()):
            assert cfg.learning_rate == 1e-4
            assert cfg.batch_size == 8

    def test_filters_mirror_around_bridge(self):
        for cfg in (axial_config(), view_config()):
            filters = [l.filters for l in cfg.levels]
            assert filters == filters[::-1]

    def test_defaults_fill_in(self):
        assert NetConfig(view="axial") == axial_config()
        assert NetConfig(view="coronal-sagittal") == view_config()

    def test_explicit_canonical_accepted(self):
        cfg = NetConfig(
            view="axial",
            levels=tuple(LevelSpec(f, s) for f, s in AXIAL_TABLE),
            input_hw=(128, 128),
        )
        assert cfg == axial_config()


class TestValidation:
    def test_unknown_view(self):
        with pytest.raises(ValueError, match="view"):
            NetConfig(view="oblique")

    def test_wrong_filter_count_rejected(self):
        bad = list(AXIAL_TABLE)
        bad[4] = (512, 2)
        with pytest.raises(ValueError, match="table"):
            NetConfig(view="axial",
                      levels=tuple(LevelSpec(f, s) for f, s in bad))

    def test_wrong_stride_rejected(self):
        bad = list(VIEW_TABLE)
        bad[1] = (128, 1)
        with pytest.raises(ValueError, match="table"):
            NetConfig(view="coronal-sagittal",
                      levels=tuple(LevelSpec(f, s) for f, s in bad))

    def test_missing_level_rejected(self):
        with pytest.raises(ValueError, match="table"):
            NetConfig(view="axial",
                      levels=tuple(LevelSpec(f, s) for f, s in AXIAL_TABLE[:-1]))

    def test_view_table_not_valid_for_axial(self):
        with pytest.raises(ValueError, match="table"):
            NetConfig(view="axial",
                      levels=tuple(LevelSpec(f, s) for f, s in VIEW_TABLE))

    def test_wrong_input_size_rejected(self):
        with pytest.raises(ValueError, match="input_hw"):
            NetConfig(view="axial", input_hw=(64, 128))
        with pytest.raises(ValueError, match="input_hw"):
            NetConfig(view="coronal-sagittal", input_hw=(128, 128))

    def test_bad_training_fields(self):
        with pytest.raises(ValueError, match="learning_rate"):
            NetConfig(view="axial", learning_rate=0.0)
        with pytest.raises(ValueError, match="batch_size"):
            NetConfig(view="axial", batch_size=0)


class TestSerialization:
    @pytest.mark.parametrize("factory", [axial_config, view_config])
    def test_round_trip(self, factory):
        cfg = factory()
        assert NetConfig.from_dict(cfg.to_dict()) == cfg

    def test_dict_shape(self):
        d = view_config().to_dict()
        assert d["view"] == "coronal-sagittal"
        assert d["levels"] == [list(row) for row in VIEW_TABLE]
        assert d["input_hw"] == [64, 128]
        assert d["learning_rate"] == 1e-4
        assert d["batch_size"] == 8

    def test_from_dict_rejects_tampered_table(self):
        d = axial_config().to_dict()
        d["levels"][0] = [32, 1]
        with pytest.raises(ValueError, match="table"):
            NetConfig.from_dict(d)

    def test_config_is_frozen(self):
        with pytest.raises(dataclasses.FrozenInstanceError):
            axial_config().view = "coronal-sagittal"
