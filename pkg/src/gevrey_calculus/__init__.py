"""Exact Gevrey semiclassical symbol calculus."""

__version__ = "0.1.0"
