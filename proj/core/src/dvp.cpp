#include "eevo/dvp.hpp"

#include <cstring>

#include "eevo/errors.hpp"

namespace eevo {

PrunedVocab prune(const Matrix& unembedding, std::span<const float> logits, std::size_t k,
                  std::uint32_t source_exit) {
    if (logits.size() != unembedding.rows) {
        throw InvalidInput("prune: logits length must equal d_vocab");
    }
    if (k == 0 || k > unembedding.rows) {
        throw InvalidInput("prune: K must satisfy 1 <= K <= d_vocab");
    }
    const std::vector<std::size_t> picked = top_k(logits, k);

    PrunedVocab pv;
    pv.source_exit = source_exit;
    pv.token_ids.reserve(k);
    pv.rows = Matrix(k, unembedding.cols);
    for (std::size_t i = 0; i < k; ++i) {
        pv.token_ids.push_back(static_cast<TokenId>(picked[i]));
        std::memcpy(pv.rows.row(i), unembedding.row(picked[i]),
                    unembedding.cols * sizeof(float));
    }
    return pv;
}

std::vector<float> project_pruned(const PrunedVocab& pruned, std::span<const float> h) {
    if (h.size() != pruned.rows.cols) {
        throw InvalidInput("project_pruned: hidden width must equal d_model");
    }
    return matvec(pruned.rows, h);
}

TokenId remap(const PrunedVocab& pruned, std::size_t local_index) {
    if (local_index >= pruned.token_ids.size()) {
        throw InvalidInput("remap: local index out of range");
    }
    return pruned.token_ids[local_index];
}

}  // namespace eevo
