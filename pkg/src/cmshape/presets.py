"""Named chain presets, one per simulated configuration row.

The seven canonical rows (in table order) drive the rate audit; the extra
entries are the blocklength/matcher variants appearing in the BER figures.
"""

from __future__ import annotations

from fractions import Fraction

from .chains import ChainConfig

_R = Fraction

_PRESETS: dict[str, ChainConfig] = {}


def _add(cfg: ChainConfig) -> None:
    _PRESETS[cfg.name] = cfg


# canonical rows (rate-audit order)
_add(ChainConfig("vc24-72-mlc", "vc-mlc", _R(2, 3), 64800, vc_index_log2=72))
_add(ChainConfig("qam64-bicm", "bicm", _R(8, 9), 64800, qam_m=3))
_add(ChainConfig("ps64qam-ccdm200", "ps-mlc", _R(4, 5), 64800, pam_m=3,
                 shaper_type="ccdm", shaper_n=200, shaper_rs=_R(187, 100)))
_add(ChainConfig("vc24-96-mlc", "vc-mlc", _R(3, 5), 64800, vc_index_log2=96))
_add(ChainConfig("qam256-bicm", "bicm", _R(9, 10), 64800, qam_m=4))
_add(ChainConfig("ps256qam-ccdm200", "ps-mlc", _R(4, 5), 64800, pam_m=4,
                 shaper_type="ccdm", shaper_n=200, shaper_rs=_R(14, 5)))
_add(ChainConfig("ps256qam-rs187-ccdm200", "ps-mlc", _R(4, 5), 64800, pam_m=4,
                 shaper_type="ccdm", shaper_n=200, shaper_rs=_R(187, 100)))

TABLE_ROWS = [
    "vc24-72-mlc", "qam64-bicm", "ps64qam-ccdm200",
    "vc24-96-mlc", "qam256-bicm", "ps256qam-ccdm200",
    "ps256qam-rs187-ccdm200",
]

# figure variants
_add(ChainConfig("ps64qam-ccdm1024", "ps-mlc", _R(4, 5), 64800, pam_m=3,
                 shaper_type="ccdm", shaper_n=1024, shaper_rs=_R(187, 100)))
_add(ChainConfig("ps64qam-ess200", "ps-mlc", _R(4, 5), 64800, pam_m=3,
                 shaper_type="ess", shaper_n=200, shaper_rs=_R(187, 100)))
_add(ChainConfig("ps64qam-ess1024", "ps-mlc", _R(4, 5), 64800, pam_m=3,
                 shaper_type="ess", shaper_n=1024, shaper_rs=_R(187, 100)))
_add(ChainConfig("ps256qam-ccdm1024", "ps-mlc", _R(4, 5), 64800, pam_m=4,
                 shaper_type="ccdm", shaper_n=1024, shaper_rs=_R(14, 5)))
_add(ChainConfig("ps256qam-ess200", "ps-mlc", _R(4, 5), 64800, pam_m=4,
                 shaper_type="ess", shaper_n=200, shaper_rs=_R(14, 5)))
_add(ChainConfig("ps256qam-rs187-ess200", "ps-mlc", _R(4, 5), 64800, pam_m=4,
                 shaper_type="ess", shaper_n=200, shaper_rs=_R(187, 100)))

# spec-literal variants kept addressable for comparisons
_add(ChainConfig("vc24-72-mlc-selfsim", "vc-mlc", _R(2, 3), 64800,
                 vc_index_log2=72, vc_pair="self-similar"))
_add(ChainConfig("vc24-96-mlc-selfsim", "vc-mlc", _R(3, 5), 64800,
                 vc_index_log2=96, vc_pair="self-similar"))
_add(ChainConfig("ps64qam-ccdm200-signlrb", "ps-mlc", _R(4, 5), 64800, pam_m=3,
                 shaper_type="ccdm", shaper_n=200, shaper_rs=_R(187, 100),
                 lrb_mode="sign"))


def get_preset(name: str) -> ChainConfig:
    cfg = _PRESETS.get(name)
    if cfg is None:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}")
    return cfg


def preset_names() -> list[str]:
    return sorted(_PRESETS)
