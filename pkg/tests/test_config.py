import pytest

from glaucofuse.config import RunConfig, dump_config, load_config, parse_config
from glaucofuse.errors import InvalidConfig, NonPositiveT
from glaucofuse.masks import Region


def test_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert cfg.encoding() == {255: Region.BACKGROUND, 128: Region.RIM, 0: Region.CUP}


def test_parse_values_comments_and_overrides():
    cfg = parse_config("# run\nepochs = 3\nblock_widths = 4, 8\nvariant = fundus  # baseline\n",
                       seed=5, variant=None)
    assert (cfg.epochs, cfg.block_widths, cfg.variant, cfg.seed) == (3, (4, 8), "fundus", 5)


def test_dump_round_trip():
    cfg = RunConfig(variant="mask_vcdr", t=12.5, label_map="0:background,1:rim,2:cup")
    assert parse_config(dump_config(cfg)) == cfg


def test_relative_paths_resolve_against_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("manifest = data/manifest.csv\nout = runs\n")
    cfg = load_config(p)
    assert cfg.manifest == str(tmp_path / "data/manifest.csv")
    assert cfg.out == str(tmp_path / "runs")


@pytest.mark.parametrize("text, error", [
    ("colour = red", InvalidConfig),
    ("epochs three", InvalidConfig),
    ("epochs = many", InvalidConfig),
    ("variant = fancy", InvalidConfig),
    ("t = 0", NonPositiveT),
    ("milestone_strategy = median", InvalidConfig),
    ("label_map = 255:background,128:rim", InvalidConfig),
])
def test_invalid_configs(text, error):
    with pytest.raises(error):
        parse_config(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(InvalidConfig):
        load_config(tmp_path / "none.cfg")
