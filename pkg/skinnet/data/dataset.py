"""
Dataset loading for the ISIC-style layout: ``<id>.png`` images next to
``<id>_segmentation.png`` masks.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from PIL import Image, UnidentifiedImageError

from ..exceptions import DataError
from .models import Sample

MASK_SUFFIX = "_segmentation"
MASK_THRESHOLD = 128

_EIGHT_BIT_IMAGE_MODES = {"RGB", "RGBA", "L", "LA", "P"}
_EIGHT_BIT_MASK_MODES = {"L", "1", "P"}


def _open(path: Path) -> Image.Image:
    try:
        with Image.open(path) as im:
            im.load()
            return im.copy()
    except (OSError, UnidentifiedImageError) as e:
        raise DataError(f"cannot read {path}: {e}") from e


def read_image(path: Path) -> NDArray[np.float32]:
    """8-bit RGB image scaled to [0, 1], shape (H, W, 3)."""
    im = _open(path)
    if im.mode not in _EIGHT_BIT_IMAGE_MODES:
        raise DataError(f"{path}: expected an 8-bit image, got mode {im.mode}")
    return np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0


def read_mask(path: Path) -> NDArray[np.uint8]:
    """8-bit grayscale mask binarized at 128."""
    im = _open(path)
    if im.mode not in _EIGHT_BIT_MASK_MODES:
        raise DataError(f"{path}: expected an 8-bit grayscale mask, got mode {im.mode}")
    gray = np.asarray(im.convert("L"))
    return (gray >= MASK_THRESHOLD).astype(np.uint8)


def write_mask_png(mask: NDArray[np.integer], path: Path) -> Path:
    """Write a binary mask as 8-bit grayscale, lesion = 255, background = 0."""
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray((np.asarray(mask) > 0).astype(np.uint8) * 255).save(path, format="PNG")
    return path


def write_image_png(image: NDArray[np.floating], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.clip(np.rint(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PNG")
    return path


def pair_files(directory: Path) -> list[tuple[str, Path, Path]]:
    """
    Match images to masks by id.

    Raises:
        DataError: an image without a mask or a mask without an image
    """
    images: dict[str, Path] = {}
    masks: dict[str, Path] = {}
    for path in directory.glob("*.png"):
        if path.stem.endswith(MASK_SUFFIX):
            masks[path.stem[: -len(MASK_SUFFIX)]] = path
        else:
            images[path.stem] = path
    unpaired = sorted(set(images) ^ set(masks))
    if unpaired:
        raise DataError(f"unpaired image/mask files for ids: {', '.join(unpaired[:10])}")
    return [(sid, images[sid], masks[sid]) for sid in sorted(images)]


def load_sample(sid: str, image_path: Path, mask_path: Path) -> Sample:
    image = read_image(image_path)
    mask = read_mask(mask_path)
    if image.shape[:2] != mask.shape:
        raise DataError(f"{sid}: image {image.shape[:2]} and mask {mask.shape} sizes differ")
    return Sample(image=image, mask=mask, id=sid)


def load_dataset(directory: Path) -> list[Sample]:
    """
    Load every image/mask pair in ``directory``, sorted by id.

    Images are scaled to [0, 1]; masks are binarized at 128.
    """
    if not directory.is_dir():
        raise DataError(f"data directory not found: {directory}")
    samples = [load_sample(*entry) for entry in pair_files(directory)]
    logger.info(f"Loaded {len(samples)} samples from {directory}")
    return samples
