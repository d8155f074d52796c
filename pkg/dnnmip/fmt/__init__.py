"""Reading and writing networks, bounds tables, images and solve reports."""


class FormatError (ValueError):
    """Raised for a file that can't be loaded."""
    pass


from .netfile import load_network, save_network
from .boundsfile import load_bounds, save_bounds
from .img import write_image, read_image, read_input, default_geometry
from .report import (result_record, write_report, load_report, aggregate,
                     format_table)
