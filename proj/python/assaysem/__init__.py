# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The assaysem Authors
"""Bioassay semantification engine."""

from ._core import (
    AssaysemError,
    Corpus,
    Semantifier,
    Service,
    assay_iri,
    emit_grid,
    ingest,
    micro_metrics,
    normalize_label,
    run_grid,
    to_ntriples,
    tokenize,
)

__all__ = [
    "AssaysemError",
    "Corpus",
    "Semantifier",
    "Service",
    "assay_iri",
    "emit_grid",
    "ingest",
    "micro_metrics",
    "normalize_label",
    "run_grid",
    "to_ntriples",
    "tokenize",
]
__version__ = "0.1.0"
