"""cricseg: delivery-clip segmentation and length classification for
cricket broadcast footage.

The pipeline gates frames on the front pitch view, cuts clips at
background-subtraction shot boundaries, drops replays via the scorecard
band, tracks the ball to its bounce, and converts the bounce row into
metres from the batsman's stumps.
"""

__version__ = "0.1.0"

from cricseg.kernels import ACTIVE_IMPL, NATIVE_AVAILABLE  # noqa: F401
