from pathlib import Path

import pytest

from fundamental_ratio.config import RunConfig
from fundamental_ratio.config import load_config
from fundamental_ratio.exc import ArgumentError
from fundamental_ratio.moduli import RegionSpec
from fundamental_ratio.sweep import SweepSettings


def write_ini(tmp_path, body, section="fundamental_ratio"):
    path = tmp_path / "setup.cfg"
    path.write_text(f"[{section}]\n{body}")
    return str(path)


class LoadConfigTest:
    def test_missing_file(self, tmp_path):
        assert load_config(str(tmp_path / "nope.cfg")) == RunConfig()

    def test_missing_section(self, tmp_path):
        path = write_ini(tmp_path, "levels = 3\n", section="other")
        assert load_config(path) == RunConfig()

    def test_values(self, tmp_path):
        path = write_ini(
            tmp_path,
            "q_min = 0.2\nlevels = 5\nstrict = yes\njobs = 4\n",
        )
        config = load_config(path)
        assert config.q_min == 0.2
        assert config.levels == 5 and isinstance(config.levels, int)
        assert config.strict is True
        assert config.jobs == 4
        assert config.eps == RunConfig().eps

    @pytest.mark.parametrize("raw", ["false", "0", "off", "no"])
    def test_false_flags(self, tmp_path, raw):
        path = write_ini(tmp_path, f"strict = {raw}\n")
        assert load_config(path).strict is False

    def test_unknown_key(self, tmp_path):
        path = write_ini(tmp_path, "colour = red\n")
        with pytest.raises(ArgumentError, match="colour"):
            load_config(path)

    def test_bad_value(self, tmp_path):
        path = write_ini(tmp_path, "levels = six\n")
        with pytest.raises(ArgumentError, match="levels"):
            load_config(path)

    def test_repository_defaults(self):
        # the shipped setup.cfg mirrors the built-in defaults
        path = Path(__file__).parent.parent / "setup.cfg"
        assert load_config(str(path)) == RunConfig()


class RunConfigTest:
    def test_override_skips_none(self):
        config = RunConfig().override(levels=4, eps=None)
        assert config.levels == 4
        assert config.eps == RunConfig().eps

    def test_override_unknown(self):
        with pytest.raises(ArgumentError):
            RunConfig().override(radius=0.1)

    def test_region(self):
        config = RunConfig(q_min=0.3, p_max=0.7, excision_radius=0.001)
        assert config.region() == RegionSpec(
            q_min=0.3, p_max=0.7, excision_radius=0.001
        )

    def test_settings(self):
        settings = RunConfig(levels=4, safety=0.5, strict=True).settings()
        assert settings == SweepSettings(levels=4, safety=0.5, strict=True)

    def test_invalid_region_surfaces(self):
        with pytest.raises(ArgumentError):
            RunConfig(q_min=0.5, q_max=0.4).region()
