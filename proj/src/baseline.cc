// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/baseline.h"

#include <algorithm>
#include <map>

namespace assaysem {

FrequencyTable BuildFrequencyTable(std::span<const BioassayRecord> train) {
  std::map<Statement, uint32_t> counts;
  for (const auto& record : train) {
    for (const auto& s : record.statements) ++counts[s];
  }
  FrequencyTable table;
  table.ranked.assign(counts.begin(), counts.end());
  // The map is already in lexicographic order, so a stable sort on count
  // yields the documented tie-break.
  std::stable_sort(table.ranked.begin(), table.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return table;
}

StatementSet NaiveSemantify(const FrequencyTable& table, size_t n) {
  StatementSet out;
  size_t m = std::min(n, table.ranked.size());
  for (size_t i = 0; i < m; ++i) out.insert(table.ranked[i].first);
  return out;
}

}  // namespace assaysem
