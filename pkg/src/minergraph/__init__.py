"""Reconstruction and analysis of the transaction network between blockchain miners.

Pipeline: ingest raw chain CSVs -> build cumulative miner networks per slice ->
concentration metrics -> component topology -> control/dominance analyses.
"""

__version__ = "0.1.0"
