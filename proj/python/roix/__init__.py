"""ROI-aware error-bounded compression of grayscale projections.

Images are 2-D numpy arrays: uint8 for 8-bit data, uint16 for 16-bit data.
Masks are boolean arrays. Geometry tables are (m, 3) uint32 arrays of
(row, x_start, x_end) with x_end exclusive.
"""

from ._core import (
    RoixError,
    ahd,
    archive_info,
    compress,
    compression_ratio,
    decompress,
    estimate_background,
    histogram,
    largest_component,
    load_image,
    make_disk_phantom,
    multi_otsu,
    normalize_intensity,
    overlap_metrics,
    quantize_abs,
    relative_improvement,
    save_image,
    segment,
    spatial_reduction,
    ssim,
    subtract_background,
    verify_bound,
)

__all__ = [
    "RoixError",
    "ahd",
    "archive_info",
    "compress",
    "compression_ratio",
    "decompress",
    "estimate_background",
    "histogram",
    "largest_component",
    "load_image",
    "make_disk_phantom",
    "multi_otsu",
    "normalize_intensity",
    "overlap_metrics",
    "quantize_abs",
    "relative_improvement",
    "save_image",
    "segment",
    "spatial_reduction",
    "ssim",
    "subtract_background",
    "verify_bound",
]
