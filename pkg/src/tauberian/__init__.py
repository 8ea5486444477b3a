"""Uniform values of finite deterministic zero-sum games under long-run and discounted averaging."""

__version__ = "0.1.0"
