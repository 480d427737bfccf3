"""QJoin: transformation-aware join discovery for tabular repositories.

The package is organized by pipeline stage: ``corpus`` loads tables and
samples columns, ``similarity`` provides the string kernels and MinHash
indexing, ``operators`` defines transformation chains, ``reward`` scores
candidate steps, ``agent`` learns operator chains, ``pipeline``
orchestrates repository-scale discovery, ``joiner`` executes the fuzzy
join, ``reuse`` persists and replays learned chains, and ``cli`` ties it
together behind the ``qjoin`` command.
"""

from .config import EngineConfig, load_config, save_config
from .corpus import Repository, load_repository
from .similarity import alcs, jaccard_qgram, lcs_substring

__all__ = [
    "EngineConfig",
    "Repository",
    "alcs",
    "jaccard_qgram",
    "lcs_substring",
    "load_config",
    "load_repository",
    "save_config",
]

__version__ = "0.1.0"
