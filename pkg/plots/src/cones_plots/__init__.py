"""Figure rendering for the nested-feasible-set benchmark CSV bundles."""

from .render import BundleError, render, render_fig3, render_fig4, render_fig5

__version__ = "0.1.0"
