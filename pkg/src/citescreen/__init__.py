"""Concept-based citation retrieval for clinical knowledge summarization.

The pipeline has three stages: Boolean query building and citation
fetching, concept-based screening (population / intervention-or-comparison
/ disease), and concept vector-space ranking.
"""

__version__ = "0.1.0"
