from __future__ import annotations

from pathlib import Path

import numpy as np
from loguru import logger

from ..autodiff import Tensor
from ..data.dataset import read_image, write_mask_png
from ..data.preprocess import Normalization, normalize, resize_image
from ..network.checkpoint import load_checkpoint
from ..network.model import forward
from ..objective.metrics import binarize


def predict(
    checkpoint: Path, image_path: Path, out_path: Path, normalization: Normalization = "standardize"
) -> Path:
    """
    Segment one image and write the lesion mask as an 8-bit PNG (lesion 255, background 0)
    at the model's input size.

    Raises:
        DataError: the image cannot be read
        CheckpointError: the checkpoint cannot be loaded
    """
    model = load_checkpoint(checkpoint)
    size = model.spec.input_size
    image = normalize(resize_image(read_image(image_path), size), normalization)
    batch = Tensor(image.transpose(2, 0, 1)[np.newaxis])
    mask = binarize(forward(model, batch))[0]
    write_mask_png(mask, out_path)
    logger.info(f"Wrote {out_path} ({int(mask.sum())} lesion pixels of {mask.size})")
    return out_path
