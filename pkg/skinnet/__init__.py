"""skinnet: dense-block U-Net with a multi-rate dilated bottleneck, on a small numpy autodiff engine."""

from .version import __version__

__all__ = ["__version__"]
