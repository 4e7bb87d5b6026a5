"""
EdgeTune - power-mode and batch-size selection for DNN workloads on edge devices.
"""

__version__ = "0.1.0"
