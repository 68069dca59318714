from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("jetssm")
except PackageNotFoundError:
    __version__ = "0+unknown"
