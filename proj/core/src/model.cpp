#include "eevo/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "eevo/errors.hpp"
#include "eevo/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight file I/O assumes a little-endian host");

namespace eevo {

void ModelConfig::validate() const {
    if (layers < 2) throw InvalidInput("config: layers must be at least 2");
    if (d_model == 0) throw InvalidInput("config: d_model must be positive");
    if (d_vocab < 2) throw InvalidInput("config: d_vocab must be at least 2");
    if (n_heads == 0) throw InvalidInput("config: n_heads must be positive");
    if (d_model % n_heads != 0) {
        throw InvalidInput("config: d_model must be divisible by n_heads");
    }
    if (d_ff == 0) throw InvalidInput("config: d_ff must be positive");
    if (max_seq == 0) throw InvalidInput("config: max_seq must be positive");
}

namespace {

// Fills a tensor with Gaussian draws, advancing the shared parameter
// counter. The counter ties each parameter to a fixed RNG index, so the
// result is independent of fill order or platform.
void fill_gaussian(std::vector<float>& data, const CounterRng& rng, double stddev,
                   std::uint64_t& counter) {
    for (float& v : data) {
        v = static_cast<float>(rng.gaussian(counter++) * stddev);
    }
}

void fill_gaussian(Matrix& m, const CounterRng& rng, double stddev, std::uint64_t& counter) {
    fill_gaussian(m.data, rng, stddev, counter);
}

template <typename Weights, typename Fn>
void for_each_tensor(Weights& w, Fn&& fn) {
    fn("embedding", w.embedding.data);
    fn("positional", w.positional.data);
    for (std::size_t l = 0; l < w.blocks.size(); ++l) {
        auto& b = w.blocks[l];
        const std::string prefix = "block" + std::to_string(l + 1) + ".";
        fn(prefix + "ln1_gain", b.ln1_gain);
        fn(prefix + "wq", b.wq.data);
        fn(prefix + "wk", b.wk.data);
        fn(prefix + "wv", b.wv.data);
        fn(prefix + "wo", b.wo.data);
        fn(prefix + "ln2_gain", b.ln2_gain);
        fn(prefix + "ff1", b.ff1.data);
        fn(prefix + "ff2", b.ff2.data);
    }
    fn("unembedding", w.unembedding.data);
}

ModelWeights make_shell(const ModelConfig& config) {
    ModelWeights w;
    w.config = config;
    w.embedding = Matrix(config.d_vocab, config.d_model);
    w.positional = Matrix(config.max_seq, config.d_model);
    w.blocks.resize(config.layers);
    for (auto& b : w.blocks) {
        b.ln1_gain.assign(config.d_model, 1.0f);
        b.wq = Matrix(config.d_model, config.d_model);
        b.wk = Matrix(config.d_model, config.d_model);
        b.wv = Matrix(config.d_model, config.d_model);
        b.wo = Matrix(config.d_model, config.d_model);
        b.ln2_gain.assign(config.d_model, 1.0f);
        b.ff1 = Matrix(config.d_ff, config.d_model);
        b.ff2 = Matrix(config.d_model, config.d_ff);
    }
    w.unembedding = Matrix(config.d_vocab, config.d_model);
    return w;
}

constexpr char kMagic[4] = {'E', 'E', 'V', 'O'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is, const char* field) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) {
        throw ParseError(ParseError::Kind::truncated,
                         std::string("weight file truncated reading ") + field);
    }
    return v;
}

}  // namespace

ModelWeights init_random(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelWeights w = make_shell(config);
    const CounterRng rng(seed);
    const double stddev = 0.02 / std::sqrt(static_cast<double>(config.layers));
    std::uint64_t counter = 0;
    fill_gaussian(w.embedding, rng, stddev, counter);
    fill_gaussian(w.positional, rng, stddev, counter);
    for (auto& b : w.blocks) {
        fill_gaussian(b.wq, rng, stddev, counter);
        fill_gaussian(b.wk, rng, stddev, counter);
        fill_gaussian(b.wv, rng, stddev, counter);
        fill_gaussian(b.wo, rng, stddev, counter);
        fill_gaussian(b.ff1, rng, stddev, counter);
        fill_gaussian(b.ff2, rng, stddev, counter);
    }
    fill_gaussian(w.unembedding, rng, stddev, counter);
    return w;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
    weights.config.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open for writing: " + path.string());
    }
    os.write(kMagic, sizeof(kMagic));
    write_u32(os, kFormatVersion);
    write_u32(os, weights.config.layers);
    write_u32(os, weights.config.d_model);
    write_u32(os, weights.config.d_vocab);
    write_u32(os, weights.config.n_heads);
    write_u32(os, weights.config.d_ff);
    write_u32(os, weights.config.max_seq);
    for_each_tensor(weights, [&](const std::string&, const std::vector<float>& data) {
        os.write(reinterpret_cast<const char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(float)));
    });
    os.flush();
    if (!os) {
        throw IoError("write failed: " + path.string());
    }
}

ModelWeights load_weights(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open for reading: " + path.string());
    }
    char magic[4] = {};
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError(ParseError::Kind::bad_magic, "weight file: bad magic");
    }
    const std::uint32_t version = read_u32(is, "version");
    if (version != kFormatVersion) {
        throw ParseError(ParseError::Kind::bad_version,
                         "weight file: unsupported version " + std::to_string(version));
    }
    ModelConfig config;
    config.layers = read_u32(is, "layers");
    config.d_model = read_u32(is, "d_model");
    config.d_vocab = read_u32(is, "d_vocab");
    config.n_heads = read_u32(is, "n_heads");
    config.d_ff = read_u32(is, "d_ff");
    config.max_seq = read_u32(is, "max_seq");
    try {
        config.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(ParseError::Kind::bad_shape,
                         std::string("weight file header: ") + e.what());
    }

    ModelWeights w = make_shell(config);
    for_each_tensor(w, [&](const std::string& name, std::vector<float>& data) {
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
        if (!is) {
            throw ParseError(ParseError::Kind::truncated,
                             "weight file truncated reading " + name);
        }
        for (float v : data) {
            if (!std::isfinite(v)) {
                throw ParseError(ParseError::Kind::non_finite,
                                 "weight file: non-finite value in " + name);
            }
        }
    });
    is.peek();
    if (!is.eof()) {
        throw ParseError(ParseError::Kind::trailing_data,
                         "weight file: trailing data after tensors");
    }
    return w;
}

std::vector<float> embed(const ModelWeights& weights, TokenId token_id) {
    if (token_id < 0 || static_cast<std::size_t>(token_id) >= weights.embedding.rows) {
        throw InvalidInput("embed: token id out of range");
    }
    const auto row = weights.embedding.row_span(static_cast<std::size_t>(token_id));
    return {row.begin(), row.end()};
}

std::vector<float> input_state(const ModelWeights& weights, TokenId token_id,
                               std::size_t position) {
    if (position >= weights.positional.rows) {
        throw CapacityError("input_state: position exceeds max_seq");
    }
    std::vector<float> h = embed(weights, token_id);
    const float* pos_row = weights.positional.row(position);
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] += pos_row[i];
    }
    return h;
}

KvCache::KvCache(const ModelConfig& config) : config_(config) {
    config_.validate();
    keys_.resize(config_.layers);
    values_.resize(config_.layers);
}

std::size_t KvCache::size(std::uint32_t layer) const {
    if (layer < 1 || layer > config_.layers) {
        throw InvalidInput("cache: layer out of range");
    }
    return keys_[layer - 1].size() / config_.d_model;
}

void KvCache::append(std::uint32_t layer, std::span<const float> key,
                     std::span<const float> value) {
    if (layer < 1 || layer > config_.layers) {
        throw InvalidInput("cache: layer out of range");
    }
    if (key.size() != config_.d_model || value.size() != config_.d_model) {
        throw InvalidInput("cache: key/value width must equal d_model");
    }
    if (size(layer) >= config_.max_seq) {
        throw CapacityError("cache: max_seq positions exceeded");
    }
    auto& k = keys_[layer - 1];
    auto& v = values_[layer - 1];
    k.insert(k.end(), key.begin(), key.end());
    v.insert(v.end(), value.begin(), value.end());
}

const float* KvCache::key_row(std::uint32_t layer, std::size_t position) const {
    return keys_[layer - 1].data() + position * config_.d_model;
}

const float* KvCache::value_row(std::uint32_t layer, std::size_t position) const {
    return values_[layer - 1].data() + position * config_.d_model;
}

std::vector<float> forward_block(const ModelWeights& weights, std::uint32_t layer,
                                 std::span<const float> h, KvCache& cache,
                                 std::size_t position, FlopsLedger* ledger) {
    const ModelConfig& cfg = weights.config;
    if (layer < 1 || layer > cfg.layers) {
        throw InvalidInput("forward_block: layer out of range");
    }
    if (h.size() != cfg.d_model) {
        throw InvalidInput("forward_block: hidden width must equal d_model");
    }
    if (position >= cfg.max_seq) {
        throw CapacityError("forward_block: position exceeds max_seq");
    }
    if (cache.size(layer) != position) {
        throw InvalidInput("forward_block: cache inconsistent with position");
    }
    const BlockWeights& block = weights.blocks[layer - 1];
    const std::size_t d = cfg.d_model;
    const std::size_t head_dim = d / cfg.n_heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));

    const std::vector<float> a = layer_norm(h, block.ln1_gain);
    if (ledger) ledger->record(FlopCategory::layernorm, layer_norm_cost(d));

    const std::vector<float> q = matvec(block.wq, a);
    const std::vector<float> k = matvec(block.wk, a);
    const std::vector<float> v = matvec(block.wv, a);
    if (ledger) ledger->record(FlopCategory::attention, 3 * projection_cost(d, d));

    cache.append(layer, k, v);
    const std::size_t n_pos = position + 1;

    // Causal attention: this position attends to every cached position,
    // itself included.
    std::vector<float> attn(d, 0.0f);
    std::vector<float> scores(n_pos);
    for (std::uint32_t head = 0; head < cfg.n_heads; ++head) {
        const std::size_t off = head * head_dim;
        const std::span<const float> q_head{q.data() + off, head_dim};
        for (std::size_t t = 0; t < n_pos; ++t) {
            const std::span<const float> k_head{cache.key_row(layer, t) + off, head_dim};
            scores[t] = dot(q_head, k_head) * scale;
        }
        if (ledger) {
            ledger->record(FlopCategory::attention,
                           static_cast<std::uint64_t>(n_pos) * (2 * head_dim + 1));
        }
        const std::vector<float> w = softmax(scores);
        if (ledger) ledger->record(FlopCategory::attention, softmax_cost(n_pos));
        for (std::size_t t = 0; t < n_pos; ++t) {
            const float* v_row = cache.value_row(layer, t) + off;
            for (std::size_t j = 0; j < head_dim; ++j) {
                attn[off + j] += w[t] * v_row[j];
            }
        }
        if (ledger) {
            ledger->record(FlopCategory::attention,
                           2 * static_cast<std::uint64_t>(n_pos) * head_dim);
        }
    }

    const std::vector<float> attn_out = matvec(block.wo, attn);
    if (ledger) ledger->record(FlopCategory::attention, projection_cost(d, d) + d);
    std::vector<float> h1(d);
    for (std::size_t i = 0; i < d; ++i) {
        h1[i] = h[i] + attn_out[i];
    }

    const std::vector<float> b = layer_norm(h1, block.ln2_gain);
    if (ledger) ledger->record(FlopCategory::layernorm, layer_norm_cost(d));
    const std::vector<float> f1 = matvec(block.ff1, b);
    const std::vector<float> g = gelu(f1);
    const std::vector<float> f2 = matvec(block.ff2, g);
    if (ledger) {
        ledger->record(FlopCategory::ffn, projection_cost(cfg.d_ff, d) + gelu_cost(cfg.d_ff) +
                                              projection_cost(d, cfg.d_ff) + d);
    }
    for (std::size_t i = 0; i < d; ++i) {
        h1[i] += f2[i];
    }
    return h1;
}

}  // namespace eevo
