"""Realizing vector configurations by positive semidefinite matrices."""

__version__ = "0.1.0"

from .clifford import embed, embed_config, embedding_dimension, in_cone
from .configurations import (GramMatrix, VectorConfig, gram, hexagon, pentagon,
                             random_nonneg_config, vectors_from_gram)
from .exterior import annihilation, creation, verify_car
from .matrix_core import (HermitianMatrix, is_psd, min_eigenvalue, psd_sqrt,
                          trace_inner_product)
from .orthant import (NonnegFactorization, diagonal_realization, factorize_nonneg,
                      hexagon_orthant_diagnostics, realization_from_factorization)
from .realization import (Realization, pentagon_psd_diagnostics, realize, realize_ladder,
                          scalar_realizable, verify_realization)
from .search import SearchReport
