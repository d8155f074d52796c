"""Gray-level images of network inputs.

Values are in ``[0, 1]`` with ``1`` meaning white.  Images are written as ASCII
portable graymaps (``P2``, maxval 255, value ``v`` stored as ``round(255 v)``
with halves rounded up), or as PNG files through pygame when the filename ends
in ``.png``.

"""

import math
import os

import numpy as np

from ..engine.util import ir
from . import FormatError

__all__ = ('default_geometry', 'write_image', 'read_image', 'read_vector',
           'read_input')


def default_geometry (n):
    """``(width, height)`` for ``n`` values: a square if ``n`` is a perfect
square, else a single row."""
    side = int(math.isqrt(n))
    if side * side == n:
        return (side, side)
    return (n, 1)


def _is_png (path):
    return os.path.splitext(path)[1].lower() == '.png'


def _quantize (values):
    return [ir(255 * v) for v in np.clip(values, 0., 1.)]


def write_image (values, width, height, path):
    """Write values as a ``width`` by ``height`` image, row by row.

Raises ``ValueError`` if ``width * height`` is not the number of values.

"""
    values = np.asarray(values, dtype=float).reshape(-1)
    if width * height != len(values) or width < 1 or height < 1:
        raise ValueError('{0}x{1} image cannot hold {2} values'
                         .format(width, height, len(values)))
    q = _quantize(values)
    if _is_png(path):
        import pygame
        grey = np.array(q, dtype=np.uint8).reshape(height, width).T
        surface = pygame.surfarray.make_surface(np.dstack((grey,) * 3))
        pygame.image.save(surface, path)
        return
    with open(path, 'w') as f:
        f.write('P2\n# dnnmip\n{0} {1}\n255\n'.format(width, height))
        for y in range(height):
            row = q[y * width:(y + 1) * width]
            f.write(' '.join(str(v) for v in row) + '\n')


def _read_pgm (f, path):
    words = []
    for line in f:
        words.extend(line.split('#', 1)[0].split())
    if not words or words[0] != 'P2':
        raise FormatError('\'{0}\': not an ASCII graymap'.format(path))
    try:
        width, height, maxval = (int(w) for w in words[1:4])
        data = [int(w) for w in words[4:]]
    except ValueError:
        raise FormatError('\'{0}\': invalid graymap'.format(path))
    if len(data) != width * height or maxval < 1:
        raise FormatError('\'{0}\': expected {1} pixels, got {2}'
                          .format(path, width * height, len(data)))
    return (np.array(data, dtype=float) / maxval, width, height)


def read_image (path):
    """Read an image written by :func:`write_image`.

read_image(path) -> (values, width, height)

Colour PNG files are converted to grey by averaging the channels.

"""
    if _is_png(path):
        import pygame
        try:
            surface = pygame.image.load(path)
        except pygame.error as e:
            raise FormatError('\'{0}\': {1}'.format(path, e))
        rgb = pygame.surfarray.array3d(surface).astype(float)
        width, height = surface.get_size()
        grey = rgb.mean(axis=2).T.reshape(-1) / 255
        return (grey, width, height)
    with open(path) as f:
        return _read_pgm(f, path)


def read_vector (path):
    """Read whitespace- or comma-separated numbers from a text file."""
    with open(path) as f:
        text = f.read()
    words = [w for line in text.splitlines()
               for w in line.split('#', 1)[0].replace(',', ' ').split()]
    try:
        return np.array([float(w) for w in words])
    except ValueError:
        raise FormatError('\'{0}\': expected numbers'.format(path))


def read_input (path):
    """Read an input vector from an image (graymap or PNG) or a text file of
numbers."""
    if _is_png(path):
        return read_image(path)[0]
    with open(path) as f:
        magic = f.read(2)
    if magic == 'P2':
        return read_image(path)[0]
    return read_vector(path)
