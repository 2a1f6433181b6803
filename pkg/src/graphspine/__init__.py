"""graphspine: abstract graphs, forest collapses, spine homology at small
rank, and the embedded-graph collapse flow."""

__version__ = "0.1.0"
