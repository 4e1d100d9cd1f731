"""Flat key/value run-configuration files.

Lines look like ``key = value`` (or ``key: value``); '#' starts a comment.
Values are parsed as int, float, fraction "p/q", bool, or left as strings.
Recognized keys mirror the CLI flags plus the per-module chain options
(scheme, pam_m, shaper_type, shaper_n, shaper_rs, lrb_mode, ldpc_rate,
ldpc_n, vc_index_log2, vc_q, vc_pair, vc_demapper, qam_m).
"""

from __future__ import annotations

from fractions import Fraction

from .chains import ChainConfig

_CHAIN_KEYS = {
    "scheme": str,
    "pam_m": int,
    "shaper_type": str,
    "shaper_n": int,
    "shaper_rs": Fraction,
    "lrb_mode": str,
    "ldpc_rate": Fraction,
    "ldpc_n": int,
    "vc_index_log2": int,
    "vc_q": int,
    "vc_pair": str,
    "vc_demapper": str,
    "qam_m": int,
}


def parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for mk in (int, float):
        try:
            return mk(text)
        except ValueError:
            pass
    if "/" in text:
        try:
            return Fraction(text)
        except ValueError:
            pass
    return text


def load_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, val = line.split(sep, 1)
                    break
            else:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip()] = parse_value(val)
    return out


def chain_config_from_mapping(name: str, mapping: dict) -> ChainConfig:
    """Build a ChainConfig from config-file keys (unknown keys ignored)."""
    kwargs = {}
    for key, conv in _CHAIN_KEYS.items():
        if key in mapping:
            kwargs[key] = conv(mapping[key])
    if "scheme" not in kwargs:
        raise ValueError("config needs a 'scheme' key (ps-mlc, vc-mlc, bicm)")
    return ChainConfig(name=name, **kwargs)
