#include "latinlex/training.h"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "latinlex/error.h"

namespace latinlex {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr size_t kUnigramTableSize = 1 << 20;

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

struct Model {
  size_t dim = 0;
  std::vector<float> input;     // |V| x dim
  std::vector<float> ngrams;    // buckets x dim
  std::vector<float> output;    // |V| x dim
  std::vector<std::vector<uint32_t>> word_ngrams;

  float* In(size_t w) { return input.data() + w * dim; }
  float* Ng(uint32_t b) { return ngrams.data() + static_cast<size_t>(b) * dim; }
  float* Out(size_t w) { return output.data() + w * dim; }
};

struct Shared {
  const TrainingConfig& config;
  const std::vector<std::vector<uint32_t>>& sentences;
  const std::vector<double>& keep;       // subsampling keep probability
  const std::vector<uint32_t>& unigram;  // negative sampling table
  uint64_t total_work = 0;               // epochs x stream tokens
  std::atomic<uint64_t> done{0};
};

struct EpochTally {
  double loss = 0;
  uint64_t updates = 0;
};

// Trains on every sentence i with i % stride == offset for one epoch.
EpochTally RunEpoch(Model& model, Shared& shared, std::mt19937_64& rng, size_t offset,
                    size_t stride) {
  const TrainingConfig& cfg = shared.config;
  const size_t dim = model.dim;
  std::vector<float> hidden(dim), grad(dim);
  std::vector<float*> inputs, outputs;
  std::vector<int> labels;
  std::vector<uint32_t> kept;
  EpochTally tally;

  auto add_sources = [&](uint32_t w) {
    inputs.push_back(model.In(w));
    if (cfg.subword.enabled) {
      for (uint32_t b : model.word_ngrams[w]) inputs.push_back(model.Ng(b));
    }
  };
  auto add_targets = [&](uint32_t target) {
    outputs.push_back(model.Out(target));
    labels.push_back(1);
    for (size_t k = 0; k < cfg.negative; ++k) {
      uint32_t neg = shared.unigram[rng() % shared.unigram.size()];
      if (neg == target) continue;
      outputs.push_back(model.Out(neg));
      labels.push_back(0);
    }
  };

  for (size_t s = offset; s < shared.sentences.size(); s += stride) {
    const auto& sentence = shared.sentences[s];
    uint64_t done = shared.done.fetch_add(sentence.size(), std::memory_order_relaxed);
    double progress = static_cast<double>(done) / static_cast<double>(shared.total_work + 1);
    float lr = static_cast<float>(cfg.initial_lr * std::max(1.0 - progress, 1e-4));

    kept.clear();
    for (uint32_t w : sentence) {
      if (shared.keep[w] >= 1.0 || Uniform01(rng) < shared.keep[w]) kept.push_back(w);
    }
    for (size_t i = 0; i < kept.size(); ++i) {
      size_t reach = cfg.window - rng() % cfg.window;
      size_t lo = i >= reach ? i - reach : 0;
      size_t hi = std::min(kept.size() - 1, i + reach);
      if (cfg.method == TrainingMethod::kCbow) {
        inputs.clear();
        outputs.clear();
        labels.clear();
        for (size_t j = lo; j <= hi; ++j) {
          if (j != i) add_sources(kept[j]);
        }
        if (inputs.empty()) continue;
        add_targets(kept[i]);
        tally.loss += NegativeSamplingStep<float>(inputs, outputs, labels, dim, lr, hidden.data(),
                                                  grad.data());
        ++tally.updates;
      } else {
        for (size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          inputs.clear();
          outputs.clear();
          labels.clear();
          add_sources(kept[i]);
          add_targets(kept[j]);
          tally.loss += NegativeSamplingStep<float>(inputs, outputs, labels, dim, lr,
                                                    hidden.data(), grad.data());
          ++tally.updates;
        }
      }
    }
  }
  return tally;
}

}  // namespace

std::string TrainingConfig::MethodId() const {
  std::string base = method == TrainingMethod::kCbow ? "cbow" : "skipgram";
  return subword.enabled ? base + "-subword" : base;
}

void TrainingConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kValidation, m); };
  if (dim < 2) fail("dim must be at least 2");
  if (window < 1) fail("window must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (min_count < 1) fail("min_count must be at least 1");
  if (!(initial_lr > 0)) fail("initial_lr must be positive");
  if (subsample_t < 0) fail("subsample_t must not be negative");
  if (threads < 1) fail("threads must be at least 1");
  if (subword.enabled) {
    if (subword.minn < 1 || subword.maxn < subword.minn) fail("need 1 <= minn <= maxn");
    if (subword.buckets == 0) fail("subword buckets must be positive");
  }
}

std::string TrainingConfig::ToJson() const {
  ordered_json j;
  j["method"] = method == TrainingMethod::kCbow ? "cbow" : "skipgram";
  j["subword"] = subword.enabled
                     ? ordered_json{{"minn", subword.minn},
                                    {"maxn", subword.maxn},
                                    {"buckets", subword.buckets}}
                     : ordered_json(nullptr);
  j["dim"] = dim;
  j["window"] = window;
  j["negative"] = negative;
  j["epochs"] = epochs;
  j["min_count"] = min_count;
  j["subsample_t"] = subsample_t;
  j["initial_lr"] = initial_lr;
  j["seed"] = seed;
  j["threads"] = threads;
  return j.dump();
}

TrainingConfig TrainingConfig::FromJson(std::string_view json) {
  TrainingConfig c;
  try {
    ordered_json j = ordered_json::parse(json);
    std::string m = j.value("method", "skipgram");
    if (m == "cbow") {
      c.method = TrainingMethod::kCbow;
    } else if (m == "skipgram") {
      c.method = TrainingMethod::kSkipgram;
    } else {
      throw Error(ErrorCode::kValidation, "unknown method '" + m + "'");
    }
    if (j.contains("subword") && !j["subword"].is_null()) {
      c.subword.enabled = true;
      c.subword.minn = j["subword"].value("minn", c.subword.minn);
      c.subword.maxn = j["subword"].value("maxn", c.subword.maxn);
      c.subword.buckets = j["subword"].value("buckets", c.subword.buckets);
    }
    c.dim = j.value("dim", c.dim);
    c.window = j.value("window", c.window);
    c.negative = j.value("negative", c.negative);
    c.epochs = j.value("epochs", c.epochs);
    c.min_count = j.value("min_count", c.min_count);
    c.subsample_t = j.value("subsample_t", c.subsample_t);
    c.initial_lr = j.value("initial_lr", c.initial_lr);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("training config: ") + e.what());
  }
  c.Validate();
  return c;
}

TrainingConfig ConfigForMethod(std::string_view method_id, TrainingConfig base) {
  std::string_view m = method_id;
  base.subword.enabled = false;
  if (m.ends_with("-subword")) {
    base.subword.enabled = true;
    m.remove_suffix(8);
  }
  if (m == "cbow") {
    base.method = TrainingMethod::kCbow;
  } else if (m == "skipgram") {
    base.method = TrainingMethod::kSkipgram;
  } else if (m == "pu") {
    throw Error(ErrorCode::kValidation, "method 'pu' is reserved and not implemented");
  } else {
    throw Error(ErrorCode::kValidation, "unknown method '" + std::string(method_id) + "'");
  }
  return base;
}

TrainingStream BuildTrainingStream(const CorpusStore& store, const Lexicon& lexicon,
                                   const CorpusLayer& layer, Resolution resolution) {
  TrainingStream stream;
  std::unordered_map<EntryId, std::string> symbols;  // chosen sw -> symbol
  auto symbol_of = [&](const EntryId& sw) -> const std::string& {
    auto [it, fresh] = symbols.try_emplace(sw);
    if (fresh) {
      if (!lexicon.Contains(sw)) {
        it->second = std::string(kUnkSymbol);
      } else if (resolution == Resolution::kSyntacticWord) {
        it->second = sw;
      } else {
        auto [lemma, superlemma] = lexicon.Ancestry(sw);
        it->second = resolution == Resolution::kLemma ? lemma : superlemma;
      }
    }
    return it->second;
  };
  store.ForEachDocument(layer, [&](const Document& doc) {
    std::vector<std::string> sentence;
    for (const Token& t : doc.tokens) {
      if (!t.is_word) continue;
      if (resolution == Resolution::kWordform) {
        sentence.push_back(lexicon.Normalize(t.surface));
        continue;
      }
      const TokenLink& link = t.link;
      if (!link.chosen || LevelValue(link.level) < kFirstCountedLevel) {
        sentence.emplace_back(kUnkSymbol);
      } else if (link.mwu != MwuRole::kContinuation) {
        sentence.push_back(symbol_of(*link.chosen));
      }
    }
    stream.push_back(std::move(sentence));
  });
  return stream;
}

EmbeddingSpace TrainEmbedding(const TrainingStream& stream, const TrainingConfig& config,
                              TrainingStats* stats) {
  config.Validate();
  uint64_t length = 0;
  std::map<std::string, uint64_t> counts;
  for (const auto& sentence : stream) {
    length += sentence.size();
    for (const auto& s : sentence) {
      if (s != kUnkSymbol) ++counts[s];
    }
  }
  if (length < config.window + 1) {
    throw Error(ErrorCode::kTraining, "stream has " + std::to_string(length) +
                                          " tokens; need at least window + 1 = " +
                                          std::to_string(config.window + 1));
  }
  std::vector<std::pair<std::string, uint64_t>> vocab;
  for (auto& [s, n] : counts) {
    if (n >= config.min_count) vocab.emplace_back(s, n);
  }
  if (vocab.empty()) {
    throw Error(ErrorCode::kTraining,
                "no symbol occurs at least min_count = " + std::to_string(config.min_count) + " times");
  }
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, uint32_t> index;
  for (uint32_t i = 0; i < vocab.size(); ++i) index[vocab[i].first] = i;

  std::vector<std::vector<uint32_t>> sentences;
  uint64_t train_words = 0;
  for (const auto& sentence : stream) {
    std::vector<uint32_t> ids;
    for (const auto& s : sentence) {
      auto it = index.find(s);
      if (it != index.end()) ids.push_back(it->second);
    }
    train_words += ids.size();
    if (ids.size() >= 2) sentences.push_back(std::move(ids));
  }

  const size_t V = vocab.size();
  const size_t dim = config.dim;
  std::vector<double> keep(V, 1.0);
  if (config.subsample_t > 0) {
    double threshold = config.subsample_t * static_cast<double>(train_words);
    for (size_t w = 0; w < V; ++w) {
      double f = static_cast<double>(vocab[w].second);
      keep[w] = (std::sqrt(f / threshold) + 1) * threshold / f;
    }
  }
  std::vector<uint32_t> unigram(kUnigramTableSize);
  {
    double norm = 0;
    for (auto& v : vocab) norm += std::pow(static_cast<double>(v.second), 0.75);
    size_t w = 0;
    double cum = std::pow(static_cast<double>(vocab[0].second), 0.75) / norm;
    for (size_t i = 0; i < unigram.size(); ++i) {
      unigram[i] = static_cast<uint32_t>(w);
      if (static_cast<double>(i + 1) / static_cast<double>(unigram.size()) > cum && w + 1 < V) {
        ++w;
        cum += std::pow(static_cast<double>(vocab[w].second), 0.75) / norm;
      }
    }
  }

  Model model;
  model.dim = dim;
  std::mt19937_64 rng(config.seed);
  auto init = [&](std::vector<float>& m, size_t rows) {
    m.resize(rows * dim);
    for (float& v : m) v = static_cast<float>((Uniform01(rng) - 0.5) / static_cast<double>(dim));
  };
  init(model.input, V);
  model.output.assign(V * dim, 0.0f);
  if (config.subword.enabled) {
    init(model.ngrams, config.subword.buckets);
    model.word_ngrams.resize(V);
    for (size_t w = 0; w < V; ++w) {
      model.word_ngrams[w] = NgramBuckets(vocab[w].first, config.subword.minn, config.subword.maxn,
                                          config.subword.buckets);
    }
  }

  Shared shared{config, sentences, keep, unigram};
  shared.total_work = config.epochs * train_words;
  TrainingStats local;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochTally total;
    if (config.threads <= 1) {
      total = RunEpoch(model, shared, rng, 0, 1);
    } else {
      std::vector<std::thread> pool;
      std::vector<EpochTally> tallies(config.threads);
      for (unsigned t = 0; t < config.threads; ++t) {
        pool.emplace_back([&, t] {
          std::mt19937_64 thread_rng(config.seed + 0x9E3779B97F4A7C15ull * (epoch * 1000 + t + 1));
          tallies[t] = RunEpoch(model, shared, thread_rng, t, config.threads);
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& t : tallies) {
        total.loss += t.loss;
        total.updates += t.updates;
      }
    }
    local.updates += total.updates;
    local.epoch_loss.push_back(total.updates ? total.loss / static_cast<double>(total.updates) : 0);
  }

  std::vector<std::string> symbols;
  std::vector<uint64_t> freq;
  std::vector<float> vectors(V * dim);
  for (size_t w = 0; w < V; ++w) {
    symbols.push_back(vocab[w].first);
    freq.push_back(vocab[w].second);
    float* out = vectors.data() + w * dim;
    std::copy(model.In(w), model.In(w) + dim, out);
    if (config.subword.enabled && !model.word_ngrams[w].empty()) {
      for (uint32_t b : model.word_ngrams[w]) {
        for (size_t d = 0; d < dim; ++d) out[d] += model.Ng(b)[d];
      }
      float n = static_cast<float>(1 + model.word_ngrams[w].size());
      for (size_t d = 0; d < dim; ++d) out[d] /= n;
    }
  }
  local.vocabulary = V;
  if (stats) *stats = local;
  SpaceKey key;
  key.method = config.MethodId();
  EmbeddingSpace space(key, dim, std::move(symbols), std::move(freq), std::move(vectors));
  if (config.subword.enabled) {
    SubwordTable table;
    table.minn = config.subword.minn;
    table.maxn = config.subword.maxn;
    table.buckets = config.subword.buckets;
    table.vectors = std::move(model.ngrams);
    space.set_subword(std::move(table));
  }
  return space;
}

}  // namespace latinlex
