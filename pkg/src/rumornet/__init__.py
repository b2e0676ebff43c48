"""Election-rumor propagation toolkit: detection funnel, information graph,
influence and exposure statistics, threshold-cascade simulation."""

__version__ = "0.1.0"
