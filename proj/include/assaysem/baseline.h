// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#ifndef ASSAYSEM_BASELINE_H_
#define ASSAYSEM_BASELINE_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "assaysem/corpus.h"

namespace assaysem {

// Statements ranked by the number of assays carrying them, descending; ties
// in lexicographic (property, value) order.
struct FrequencyTable {
  std::vector<std::pair<Statement, uint32_t>> ranked;
};

FrequencyTable BuildFrequencyTable(std::span<const BioassayRecord> train);

// The first min(n, |ranked|) statements. Every assay gets the same set.
StatementSet NaiveSemantify(const FrequencyTable& table, size_t n);

}  // namespace assaysem

#endif  // ASSAYSEM_BASELINE_H_
