"""Shipped picture-style presets (identity + six hand-authored looks)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .bundleio import read_style
from .photofinish import StyleParams


def builtin_preset_dir() -> Path:
    return Path(resources.files("isplib") / "presets")


def load_builtin_styles() -> dict[str, StyleParams]:
    styles: dict[str, StyleParams] = {}
    for path in sorted(builtin_preset_dir().glob("*.json")):
        style = read_style(path)
        styles[style.name] = style
    return styles


def load_style_dir(directory: str | Path) -> dict[str, StyleParams]:
    styles: dict[str, StyleParams] = {}
    for path in sorted(Path(directory).glob("*.json")):
        style = read_style(path)
        styles[style.name] = style
    return styles
