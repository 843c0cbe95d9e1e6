"""Standalone figure rendering for the harness's CSV outputs."""

from banditbench_plots.render import render

__all__ = ["render"]
