"""rarelm: rare-word embedding enrichment for LSTM language models.

Trains small word-level LSTM and Kneser-Ney n-gram language models,
enriches rare-word rows of a pre-trained LSTM's embedding matrices with a
weighted centroid of frequent similar words, and evaluates the effect via
n-best rescoring, perplexity, WER and rare-word recognition accuracy.
"""

__version__ = "0.1.0"
