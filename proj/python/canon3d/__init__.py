"""Noise-robust rigid-motion canonicalization for 3D point clouds."""

try:
    from . import _canon3d as _impl  # installed layout: extension inside the package
except ImportError:  # build-tree layout: extension importable top-level
    import _canon3d as _impl

__all__ = [
    "CanonError",
    "EncoderParams",
    "act",
    "canonicalize",
    "chamfer",
    "denoise",
    "encode",
    "estimate_frame",
    "fps",
    "init_params",
    "knn",
    "load_params",
    "random_transform",
    "rotation_geodesic",
    "sample_surface",
    "save_params",
    "train",
]

globals().update({name: getattr(_impl, name) for name in __all__})
