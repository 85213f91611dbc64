"""Differentially private synthetic term-frequency vectors (SynTF)."""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, cosine, load_embeddings
from .mechanism import (
    MechanismTables,
    PrivacyParams,
    SyntheticTfVector,
    build_tables,
    document_rng,
    multinomial_log_pmf,
    output_distribution,
    sample_term,
    synthesize,
)
from .privacy import (
    PrivacyReport,
    epsilon_conditions,
    eta,
    improved_loss,
    privacy_report,
    standard_loss,
    tight_loss,
    utility_bounds,
)
from .rating import RatingMatrix, RatingParams, bigram_overlap, build_rating_matrix, rate
from .vectorize import SparseVector, tfidf_transform, to_composition, vectorize
from .vocab import Token, VocabOptions, Vocabulary, build_vocabulary, extend_with_synonyms, tokenize
