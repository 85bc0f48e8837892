#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rnns/lexing.hpp"

namespace rnns {

// Output distribution of one classify call. Entries are non-negative and sum
// to one within 1e-6; predicted is the argmax with ties going to the lowest
// index.
struct Probabilities {
  std::vector<double> probs;
  int predicted = 0;

  static Probabilities from_probs(std::vector<double> probs);
};

// The black-box contract: a probability vector per code sample, nothing else.
class VictimInterface {
 public:
  virtual ~VictimInterface() = default;
  virtual Probabilities classify(const SourceUnit& unit) = 0;
  virtual int num_labels() const = 0;
};

class QueryCounter {
 public:
  std::uint64_t count() const { return n_.load(std::memory_order_relaxed); }
  void increment() { n_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> n_{0};
};

// Wraps a victim so every classify call is counted: the QT instrument.
class CountingVictim : public VictimInterface {
 public:
  explicit CountingVictim(VictimInterface& inner) : inner_(inner) {}

  Probabilities classify(const SourceUnit& unit) override {
    counter_.increment();
    return inner_.classify(unit);
  }
  int num_labels() const override { return inner_.num_labels(); }
  const QueryCounter& counter() const { return counter_; }

 private:
  VictimInterface& inner_;
  QueryCounter counter_;
};

// Hashed bag-of-tokens featurization. Identifier, keyword, literal, operator
// and punctuation tokens are hashed by text; string and comment tokens each
// map to one reserved bucket so their contents never carry signal.
// Returned entries are sorted by index.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;
SparseFeatures featurize(const SourceUnit& unit, std::uint32_t feature_count,
                         std::uint64_t seed);

struct ToyTrainConfig {
  int epochs = 200;
  double learning_rate = 0.5;
  double weight_decay = 0.01;  // L2 penalty on weights (not bias)
  std::uint64_t seed = 1;
  std::uint32_t feature_count = 32768;
};

// Softmax regression over hashed token counts: the desk-scale stand-in for a
// fine-tuned code classifier. Identifier names are features, so renaming
// them moves the output distribution.
struct ToyModel {
  int classes = 0;
  std::uint32_t feature_count = 0;
  std::uint64_t feature_seed = 0;
  std::vector<double> weights;  // classes x feature_count, row-major
  std::vector<double> bias;     // classes
  ToyTrainConfig train_config;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
};

// Mean cross-entropy loss and its analytic gradient, exposed so tests can
// check the gradient against finite differences.
double toy_loss(const ToyModel& model, const std::vector<SparseFeatures>& x,
                const std::vector<int>& y);
void toy_gradient(const ToyModel& model, const std::vector<SparseFeatures>& x,
                  const std::vector<int>& y, std::vector<double>& grad_w,
                  std::vector<double>& grad_b);

// Full-batch gradient descent, deterministic in (data, config). Requires at
// least two classes and ten samples per class.
ToyModel train_toy(const std::vector<SourceUnit>& data,
                   const ToyTrainConfig& config);

Probabilities classify_toy(const ToyModel& model, const SourceUnit& unit);

std::string serialize_toy(const ToyModel& model);
ToyModel parse_toy(std::string_view text);
void save_toy(const ToyModel& model, const std::string& path);
ToyModel load_toy(const std::string& path);

class ToyVictim : public VictimInterface {
 public:
  explicit ToyVictim(ToyModel model) : model_(std::move(model)) {}

  Probabilities classify(const SourceUnit& unit) override {
    return classify_toy(model_, unit);
  }
  int num_labels() const override { return model_.classes; }
  const ToyModel& model() const { return model_; }

 private:
  ToyModel model_;
};

}  // namespace rnns
