"""Event-camera sensor-configuration benchmarking: transduction, representation, detection and evaluation."""

__version__ = "0.1.0"
