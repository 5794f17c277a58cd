"""Gathering, leader election and gossip for mobile agents that can only count who shares their node."""

__version__ = "0.1.0"
