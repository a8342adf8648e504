#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eevo/math.hpp"
#include "eevo/model.hpp"

namespace eevo {

// The K tokens kept after pruning at exit p, plus the matching rows of the
// unembedding matrix. Built fresh for every generated token and discarded
// when the token is emitted; rows are physical copies so the projection is
// self-contained.
struct PrunedVocab {
    std::vector<TokenId> token_ids;  // K original ids, descending by pruning logit
    Matrix rows;                     // W_t, K x d_model; row i is W row token_ids[i]
    std::uint32_t source_exit = 0;   // the exit p whose logits selected the ids

    std::size_t size() const { return token_ids.size(); }
};

// Selects the top-k logits (deterministic tie-break from top_k) and gathers
// the matching unembedding rows. The gather is a copy and costs no FLOPs.
PrunedVocab prune(const Matrix& unembedding, std::span<const float> logits, std::size_t k,
                  std::uint32_t source_exit);

// Pruned logits: result[i] equals the full-projection logit of token
// token_ids[i] bit-exactly (same kernel, same row bytes, same order).
std::vector<float> project_pruned(const PrunedVocab& pruned, std::span<const float> h);

// Original-vocabulary id for a pruned-local index.
TokenId remap(const PrunedVocab& pruned, std::size_t local_index);

}  // namespace eevo
