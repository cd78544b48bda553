"""Acceptance-scale smoke tests for urysohn-fractals."""
