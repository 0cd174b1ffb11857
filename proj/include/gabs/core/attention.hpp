#ifndef GABS_CORE_ATTENTION_HPP
#define GABS_CORE_ATTENTION_HPP

#include <span>

#include "gabs/core/types.hpp"

namespace gabs {

// Accepts a row iff every entry is >= 0 and the sum is 1 within 1e-6.
// Throws NegativeEntryError or NotNormalizedError otherwise.
void validate_distribution(std::span<const double> row);

// Adds one normalized attention row to the ledger. The total grows by
// exactly 1 per row, so after t rows total == t.
AttentionLedger accumulate_attention(const AttentionLedger& ledger, std::span<const double> row);

}  // namespace gabs

#endif  // GABS_CORE_ATTENTION_HPP
