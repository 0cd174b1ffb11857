#ifndef GABS_SEARCH_ORACLE_HPP
#define GABS_SEARCH_ORACLE_HPP

#include "gabs/search/beam.hpp"

namespace gabs {

// Ground-truth argmax of the decode objective: enumerates every sequence of
// generated length <= l_max that ends with end-of-sequence, scores each with
// the identical per-step scoring pipeline, and returns the top pool. Guarded
// by (|V|-1)^l_max <= 10^6.
DecodeResult exhaustive_oracle(const Model& model, const SourceDocument& source,
                               const GlobalAttention& g, const ScorerConfig& config, int l_max);

}  // namespace gabs

#endif  // GABS_SEARCH_ORACLE_HPP
