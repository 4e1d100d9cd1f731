"""Plotting companion for cmshape: BER curves and 2-D projection insets.

Pure file-in/file-out: reads the harness CSV schema and projection CSVs,
writes image files.  No simulation logic lives here.
"""

__version__ = "0.1.0"
