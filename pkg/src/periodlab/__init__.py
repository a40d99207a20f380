"""periodlab: period pairings between singular homology and de Rham
cohomology, computed by integrating differential forms over singular
simplices that are C^1 on open faces."""

__version__ = "0.1.0"
