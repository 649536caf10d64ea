"""Batched dueling-bandit simulation: C2B, C2B-KL and an all-pairs baseline."""

from .algos import C2B, C2BKL, AllPairs, make_policy, run_policy
from .harness import RunConfig, MatrixSource, run_experiment
from .prefmat import PreferenceMatrix, condorcet_analysis, generate_synthetic, load_csv, save_csv

__version__ = "0.1.0"
