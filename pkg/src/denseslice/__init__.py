"""Dense-IoT SDN slicing toolkit: topology modeling, slice management,
connectivity checks, hop-count routing, a deterministic data-plane
simulator, and an experiment harness with a northbound HTTP API."""

__version__ = "0.1.0"
