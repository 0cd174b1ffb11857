#ifndef GABS_TESTS_FIXTURES_HPP
#define GABS_TESTS_FIXTURES_HPP

#include <string>

#include "gabs/model/model.hpp"

namespace gabs::testing {

// Three-token vocabulary {a=0, b=1, eos=2} over a two-token source.
inline const char* kTm1Json =
    R"({"vocab_size": 3, "source_len": 2, "entries": [)"
    R"({"prefix": [], "p": [0.6,0.3,0.1], "att": [0.7,0.3]}, )"
    R"({"prefix": [0], "p": [0.1,0.6,0.3], "att": [0.2,0.8]}, )"
    R"({"prefix": [0,1], "p": [0.1,0.1,0.8], "att": [0.5,0.5]}], )"
    R"("default": {"p": [0.1,0.1,0.8], "att": [0.5,0.5]}})";

inline TableModel tm1() { return TableModel::from_json_text(kTm1Json); }

inline SourceDocument src2() { return SourceDocument{{0, 1}, std::nullopt}; }

}  // namespace gabs::testing

#endif  // GABS_TESTS_FIXTURES_HPP
