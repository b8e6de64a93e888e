"""Line-oriented ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Tuple-valued keys take comma
separated values. Unknown keys are an error. Every key and its default::

    variant              proposed   proposed|fundus_vcdr|fundus|mask_vcdr|mask|vcdr_logistic
    seed                 0
    epochs               20
    learning_rate        0.02
    momentum             0.9
    batch_size           32
    weight_decay         0.0
    p_flip               0.5
    p_blur               0.5
    blur_sigma_min       0.1
    blur_sigma_max       2.0
    block_widths         8,16,32
    feature_dim          64
    input_pool           8
    rgb_mean             0.485,0.456,0.406
    rgb_std              0.229,0.224,0.225
    synth_mean           0.5        vessel and reduced planes
    synth_std            0.5
    mask_mean            0.5        repeated-mask planes
    mask_std             0.5
    t                    20.0
    milestone_strategy   band       band|means
    vessel_polarity      dark       dark|bright
    label_map            255:background,128:rim,0:cup
    roi_size             256
    crop_margin          2.0
    logistic_iterations  2000
    logistic_learning_rate 1.0
    manifest             (none)     relative paths resolve against the config file
    out                  (none)
"""
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Tuple, get_args, get_origin, get_type_hints

from .channels import MILESTONE_STRATEGIES, POLARITIES
from .errors import InvalidConfig, NonPositiveT
from .masks import Region

VARIANTS = ("proposed", "fundus_vcdr", "fundus", "mask_vcdr", "mask", "vcdr_logistic")


@dataclass(frozen=True)
class RunConfig:
    variant: str = "proposed"
    seed: int = 0
    epochs: int = 20
    learning_rate: float = 0.02
    momentum: float = 0.9
    batch_size: int = 32
    weight_decay: float = 0.0
    p_flip: float = 0.5
    p_blur: float = 0.5
    blur_sigma_min: float = 0.1
    blur_sigma_max: float = 2.0
    block_widths: Tuple[int, ...] = (8, 16, 32)
    feature_dim: int = 64
    input_pool: int = 8
    rgb_mean: Tuple[float, ...] = (0.485, 0.456, 0.406)
    rgb_std: Tuple[float, ...] = (0.229, 0.224, 0.225)
    synth_mean: float = 0.5
    synth_std: float = 0.5
    mask_mean: float = 0.5
    mask_std: float = 0.5
    t: float = 20.0
    milestone_strategy: str = "band"
    vessel_polarity: str = "dark"
    label_map: str = "255:background,128:rim,0:cup"
    roi_size: int = 256
    crop_margin: float = 2.0
    logistic_iterations: int = 2000
    logistic_learning_rate: float = 1.0
    manifest: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if not self.t > 0:
            raise NonPositiveT(self.t)
        for name in ("p_flip", "p_blur"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1]")
        if self.epochs < 0 or self.batch_size < 1:
            raise InvalidConfig("epochs must be >= 0 and batch_size >= 1")
        if len(self.rgb_mean) != 3 or len(self.rgb_std) != 3:
            raise InvalidConfig("rgb_mean and rgb_std need three values")
        if self.milestone_strategy not in MILESTONE_STRATEGIES:
            raise InvalidConfig(f"unknown milestone_strategy {self.milestone_strategy!r}")
        if self.vessel_polarity not in POLARITIES:
            raise InvalidConfig(f"unknown vessel_polarity {self.vessel_polarity!r}")
        self.encoding()

    def encoding(self):
        enc = {}
        for item in self.label_map.split(","):
            try:
                gray, name = item.split(":")
                enc[int(gray)] = Region[name.strip().upper()]
            except (ValueError, KeyError):
                raise InvalidConfig(f"bad label_map entry {item!r}") from None
        if sorted(enc.values()) != sorted(Region):
            raise InvalidConfig("label_map must name background, rim and cup exactly once")
        return enc


def _coerce(key, raw, hint):
    if get_origin(hint) is tuple:
        inner = get_args(hint)[0]
        return tuple(inner(v.strip()) for v in raw.split(",") if v.strip())
    if get_origin(hint) is not None:  # Optional[str]
        return raw or None
    return hint(raw)


def parse_config(text: str, base_dir=None, **overrides) -> RunConfig:
    hints = get_type_hints(RunConfig)
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"config line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in hints:
            raise InvalidConfig(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw, hints[key])
        except ValueError:
            raise InvalidConfig(f"config line {lineno}: bad value for {key}: {raw!r}") from None
    if base_dir is not None:
        for key in ("manifest", "out"):
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise InvalidConfig(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent, **overrides)


def dump_config(config: RunConfig) -> str:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"

