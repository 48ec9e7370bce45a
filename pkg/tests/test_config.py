import pytest

from background.clustering import ClusterParams
from config import PipelineConfig
from errors import InvalidInputError


def test_defaults():
    config = PipelineConfig()
    assert config.tau_h == 0.20 and config.tau_eh == 0.10
    assert config.sigma_n == 20.0 and config.epsilon == 10.0
    assert config.min_pts is None
    assert config.illumination_detection and config.superpixel_dilation


def test_text_round_trip(tmp_path):
    config = PipelineConfig(tau_h=0.3, epsilon=7.5, min_pts=6, superpixel_dilation=False, workers=3)
    path = tmp_path / "spmd.env"
    config.save(path)
    assert PipelineConfig.load(path) == config


def test_unset_min_pts_is_omitted():
    assert "min_pts=" not in PipelineConfig().to_text()


def test_partial_text_keeps_defaults():
    config = PipelineConfig.from_text("# tuned for night scenes\nepsilon=12\nillumination_detection=false\n")
    assert config.epsilon == 12.0
    assert config.illumination_detection is False
    assert config.tau_h == 0.20


@pytest.mark.parametrize("text", ["tau_h=1.5\n", "epsilon=abc\n", "unknown_key=1\n", "min_pts=1\n"])
def test_invalid_text(text):
    with pytest.raises(InvalidInputError):
        PipelineConfig.from_text(text)


def test_stage_parameters():
    config = PipelineConfig(compactness=15.0, blur_radius=3, min_pts=4)
    assert config.slic_params().m == 15.0
    assert config.motion_params().blur_radius == 3
    assert config.cluster_params() == ClusterParams(epsilon=10.0, min_pts=4)
    assert config.illumination_params().tau_eh == 0.10
