"""cmshape: coded-modulation chains comparing multidimensional Voronoi
constellations against probabilistically shaped QAM over AWGN."""

__version__ = "0.1.0"
