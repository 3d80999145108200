"""Index theory of twisted Dirac families on flat tori, at desk scale."""

__version__ = "0.1.0"
