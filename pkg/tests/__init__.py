"""Unit tests for urysohn-fractals."""
