"""Dimers, lattice permutations and the random-path model on discrete tori."""

__version__ = "0.1.0"

from .torus import ExtendedTorusGeom, GeometryError, ReflectionPlane, TorusGeom, all_planes  # noqa: E402

__all__ = ["TorusGeom", "ExtendedTorusGeom", "ReflectionPlane", "GeometryError", "all_planes", "__version__"]
