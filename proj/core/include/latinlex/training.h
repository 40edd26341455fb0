#ifndef LATINLEX_TRAINING_H_
#define LATINLEX_TRAINING_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/embedding_space.h"
#include "latinlex/lexicon.h"

namespace latinlex {

enum class TrainingMethod { kCbow, kSkipgram };

struct SubwordConfig {
  bool enabled = false;
  int minn = 3;
  int maxn = 6;
  uint32_t buckets = 100000;
};

struct TrainingConfig {
  TrainingMethod method = TrainingMethod::kSkipgram;
  SubwordConfig subword;
  size_t dim = 100;
  size_t window = 5;
  size_t negative = 5;
  size_t epochs = 5;
  uint64_t min_count = 5;
  double subsample_t = 1e-4;  // 0 disables subsampling
  double initial_lr = 0.025;
  uint64_t seed = 1;
  // 1: deterministic single-threaded run. More: Hogwild-style parallel
  // training with unsynchronized updates; results vary run to run.
  unsigned threads = 1;

  std::string MethodId() const;  // cbow, skipgram, cbow-subword, skipgram-subword
  void Validate() const;         // Error(kValidation)
  std::string ToJson() const;
  static TrainingConfig FromJson(std::string_view json);
};

TrainingConfig ConfigForMethod(std::string_view method_id, TrainingConfig base = {});

// One sentence per document.
using TrainingStream = std::vector<std::vector<std::string>>;
inline constexpr std::string_view kUnkSymbol = "<unk>";

// Word tokens of the layer as symbols of the resolution: the normalized
// surface, or the id of the chosen syntactic word / its lemma / its
// superlemma. Below level 3 the non-wordform resolutions emit kUnkSymbol;
// a multi-word unit emits one symbol at its head. Punctuation is skipped.
TrainingStream BuildTrainingStream(const CorpusStore& store, const Lexicon& lexicon,
                                   const CorpusLayer& layer, Resolution resolution);

struct TrainingStats {
  std::vector<double> epoch_loss;  // mean loss per update, per epoch
  uint64_t updates = 0;
  size_t vocabulary = 0;
};

// Vocabulary: symbols with count >= min_count, kUnkSymbol excluded, by
// count descending then symbol. Out-of-vocabulary tokens are dropped before
// windowing. Throws Error(kTraining) on a stream shorter than window + 1 or
// an empty vocabulary.
EmbeddingSpace TrainEmbedding(const TrainingStream& stream, const TrainingConfig& config,
                              TrainingStats* stats = nullptr);

// log(sigmoid(x)) without overflow.
template <class Real>
Real LogSigmoid(Real x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <class Real>
Real Sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

// One negative-sampling update. The hidden vector h is the mean of the input
// rows; the loss is
//   -sum_j [label_j log s(u_j.h) + (1 - label_j) log s(-u_j.h)]
// over the output rows u_j. grad_input receives the gradient with respect to
// each input row (identical for all of them); grad_outputs, if non-empty,
// the gradient per output row. With lr > 0 the rows are then moved by -lr
// times their gradient. Training and the gradient check both call this.
template <class Real>
Real NegativeSamplingStep(std::span<Real* const> inputs, std::span<Real* const> outputs,
                          std::span<const int> labels, size_t dim, Real lr, Real* hidden,
                          Real* grad_input, std::span<Real* const> grad_outputs = {}) {
  const Real inv_n = Real(1) / static_cast<Real>(inputs.size());
  for (size_t d = 0; d < dim; ++d) hidden[d] = 0;
  for (Real* row : inputs) {
    for (size_t d = 0; d < dim; ++d) hidden[d] += row[d];
  }
  for (size_t d = 0; d < dim; ++d) {
    hidden[d] *= inv_n;
    grad_input[d] = 0;
  }
  Real loss = 0;
  for (size_t j = 0; j < outputs.size(); ++j) {
    Real* u = outputs[j];
    Real dot = 0;
    for (size_t d = 0; d < dim; ++d) dot += u[d] * hidden[d];
    loss -= labels[j] ? LogSigmoid(dot) : LogSigmoid(-dot);
    Real g = Sigmoid(dot) - static_cast<Real>(labels[j]);
    for (size_t d = 0; d < dim; ++d) grad_input[d] += g * u[d];
    if (!grad_outputs.empty()) {
      for (size_t d = 0; d < dim; ++d) grad_outputs[j][d] = g * hidden[d];
    }
    if (lr > 0) {
      for (size_t d = 0; d < dim; ++d) u[d] -= lr * g * hidden[d];
    }
  }
  for (size_t d = 0; d < dim; ++d) grad_input[d] *= inv_n;
  if (lr > 0) {
    for (Real* row : inputs) {
      for (size_t d = 0; d < dim; ++d) row[d] -= lr * grad_input[d];
    }
  }
  return loss;
}

}  // namespace latinlex

#endif  // LATINLEX_TRAINING_H_
