from . import engine, kepler, kovalevskaya

__all__ = ["engine", "kepler", "kovalevskaya"]
