"""Sliding-window tiling for large rasters.

Windows are fixed-size squares laid out row-major. When a dimension
is not a multiple of the tile size the last window on that axis is
shifted back so it ends exactly at the edge; when the whole dimension
is smaller than the tile the single window keeps the image size and
is marked padded.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

DEFAULT_TILE = 512


@dataclass(frozen=True)
class TileWindow:
    x: int
    y: int
    w: int
    h: int
    padded: bool = False


def _axis_origins(dim: int, tile: int) -> tuple[list[int], int, bool]:
    """Origins along one axis plus the window size and padding flag."""
    if dim < tile:
        return [0], dim, True
    count = math.ceil(dim / tile)
    origins = [i * tile for i in range(count)]
    origins[-1] = dim - tile
    return origins, tile, False


def plan_tiles(width: int, height: int, tile: int = DEFAULT_TILE) -> list[TileWindow]:
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    if tile < 1:
        raise ValueError("tile size must be positive")
    xs, w, pad_x = _axis_origins(width, tile)
    ys, h, pad_y = _axis_origins(height, tile)
    padded = pad_x or pad_y
    return [TileWindow(x=x, y=y, w=w, h=h, padded=padded) for y in ys for x in xs]


def crop(raster: np.ndarray, window: TileWindow) -> np.ndarray:
    """Cut a window out of the raster, zero-filling only padded windows."""
    height, width = raster.shape[:2]
    if window.x < 0 or window.y < 0 or window.x >= width or window.y >= height:
        raise ValueError("window origin outside the raster")
    x_end = window.x + window.w
    y_end = window.y + window.h
    if (x_end > width or y_end > height) and not window.padded:
        raise ValueError("window extends past the raster edge")
    if x_end <= width and y_end <= height:
        return raster[window.y:y_end, window.x:x_end].copy()
    out = np.zeros((window.h, window.w) + raster.shape[2:], dtype=raster.dtype)
    copy_h = min(y_end, height) - window.y
    copy_w = min(x_end, width) - window.x
    out[:copy_h, :copy_w] = raster[window.y:window.y + copy_h, window.x:window.x + copy_w]
    return out


def patch_name(image_id: str, window: TileWindow) -> str:
    return f"{image_id}__y{window.y}_x{window.x}"


def sample_windows(windows: list[TileWindow], count: int, seed: int) -> list[TileWindow]:
    """Deterministic sample without replacement; count is capped at len."""
    if count >= len(windows):
        return list(windows)
    return random.Random(seed).sample(windows, count)
