"""Sample decreasing-threshold greedy for k-extendible systems, with baselines and a bench harness."""

__all__ = [
    "config",
    "errors",
    "ground",
    "constraints",
    "objectives",
    "solvers",
    "trials",
    "instances",
    "storage",
    "corpus",
    "report",
    "cli",
]
