from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("susy_dfs")
except PackageNotFoundError:
    __version__ = ""
