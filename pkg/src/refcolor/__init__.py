"""Controllable exemplar-composed image colorization.

Array conventions used across the package:

* RGB images are ``uint8`` arrays of shape ``(H, W, 3)``.
* Grayscale images are ``float64`` arrays of shape ``(H, W)`` with values
  in ``[0, 1]``.
* Lab images are ``float64`` arrays of shape ``(H, W, 3)`` holding the
  ``L`` plane in ``[0, 100]`` and signed ``a``/``b`` chrominance planes.
"""

__version__ = "0.1.0"
