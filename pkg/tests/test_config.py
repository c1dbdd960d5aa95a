"""Configuration grammar: parsing, echoing, overrides, density round trips."""

import numpy as np
import pytest

from ratiogan.config import (
    apply_overrides,
    density_from_section,
    density_to_section,
    train_config_from_text,
    train_config_to_text,
)
from ratiogan.densities import gaussian, mixture, ring, uniform

BASE = """
[loss]
name = MSE

[train]
lambda = 10.0
critic_iters = 5
seed = 7

[density.target]
kind = gaussian
mean = 4.0
cov = 1.0

[density.origin]
kind = gaussian
mean = 0.0
cov = 1.0
"""


class TestParsing:
    def test_basic_fields(self):
        cfg = train_config_from_text(BASE)
        assert cfg.loss_name == "MSE"
        assert cfg.lam == 10.0
        assert cfg.critic_iters == 5
        assert cfg.seed == 7
        assert cfg.f_spec == gaussian([4.0], [[1.0]])

    def test_defaults_fill_in(self):
        cfg = train_config_from_text(BASE)
        assert cfg.batch_size == 64
        assert cfg.learning_rate == 1e-4
        assert cfg.beta1 == 0.5 and cfg.beta2 == 0.9
        assert cfg.gen_hidden_widths == (64, 64)

    def test_unknown_keys_reported_exhaustively(self):
        text = BASE + "\n[generator]\nwidth = 3\n"
        text = text.replace("critic_iters = 5", "critic_iters = 5\nbogus = 1")
        with pytest.raises(ValueError) as err:
            train_config_from_text(text)
        msg = str(err.value)
        assert "bogus" in msg and "width" in msg

    def test_missing_sections_reported(self):
        with pytest.raises(ValueError, match=r"density.target"):
            train_config_from_text("[loss]\nname = MSE\n")

    def test_sample_file_target(self):
        text = BASE.replace("kind = gaussian\nmean = 4.0\ncov = 1.0", "kind = file\npath = data.csv", 1)
        cfg = train_config_from_text(text)
        assert cfg.f_spec == "data.csv"

    def test_origin_must_be_analytic(self):
        text = BASE.replace(
            "[density.origin]\nkind = gaussian\nmean = 0.0\ncov = 1.0",
            "[density.origin]\nkind = file\npath = z.csv",
        )
        with pytest.raises(ValueError, match="analytic"):
            train_config_from_text(text)


class TestDensityRoundTrips:
    @pytest.mark.parametrize(
        "spec",
        [
            gaussian([4.0], [[1.0]]),
            gaussian([0.5, -1.0], [[2.0, 0.3], [0.3, 1.0]]),
            ring(8, 2.0, 0.02),
            uniform([0.0, -1.0], [1.0, 1.0]),
            mixture([(0.5, gaussian([-2.0], [[1.0]])), (0.5, gaussian([2.0], [[1.0]]))]),
            "samples.csv",
        ],
    )
    def test_to_section_and_back(self, spec):
        assert density_from_section(density_to_section(spec)) == spec


class TestEcho:
    def test_round_trip_equality(self):
        cfg = train_config_from_text(BASE)
        echoed = train_config_to_text(cfg)
        assert train_config_from_text(echoed) == cfg

    def test_round_trip_with_every_density_kind(self):
        for section in (
            "kind = ring\nmodes = 8\nradius = 2.0\nsigma = 0.02",
            "kind = uniform\nlow = 0.0 0.0\nhigh = 1.0 1.0",
            "kind = mixture\ncomponents = 0.5 gaussian -2.0 1.0 | 0.5 gaussian 2.0 1.0",
        ):
            text = BASE.replace("kind = gaussian\nmean = 4.0\ncov = 1.0", section, 1)
            cfg = train_config_from_text(text)
            assert train_config_from_text(train_config_to_text(cfg)) == cfg


class TestOverrides:
    def test_simple_override(self):
        text = apply_overrides(BASE, ["train.lambda=0.1", "loss.name=CrossEntropy"])
        cfg = train_config_from_text(text)
        assert cfg.lam == 0.1
        assert cfg.loss_name == "CrossEntropy"

    def test_density_section_override(self):
        text = apply_overrides(BASE, ["density.target.mean=2.5"])
        cfg = train_config_from_text(text)
        assert cfg.f_spec == gaussian([2.5], [[1.0]])

    def test_malformed_override_rejected(self):
        with pytest.raises(ValueError, match="section.key=value"):
            apply_overrides(BASE, ["lambda 10"])
        with pytest.raises(ValueError, match="section-qualified"):
            apply_overrides(BASE, ["lambda=10"])
