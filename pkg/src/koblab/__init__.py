"""koblab: certified Kobayashi metric/distance brackets on convex domains,
geodesic search by length minimization, and visibility diagnostics."""

__version__ = "0.1.0"
