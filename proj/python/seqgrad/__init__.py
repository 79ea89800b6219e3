"""Sequential block-coordinate gradient flow lab."""

try:
    from seqgrad._core import *  # installed layout: the extension lives in the package
    from seqgrad._core import __version__
except ImportError:  # build-tree layout: the extension sits alone on sys.path
    from _core import *
    from _core import __version__
