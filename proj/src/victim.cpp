#include "rnns/victim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "rnns/util.hpp"

namespace rnns {

namespace {

using nlohmann::json;

void softmax_inplace(std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

std::vector<double> logits_of(const ToyModel& model, const SparseFeatures& x) {
  std::vector<double> logits(model.bias);
  for (const auto& [idx, value] : x) {
    for (int c = 0; c < model.classes; ++c)
      logits[static_cast<std::size_t>(c)] +=
          model.weights[static_cast<std::size_t>(c) * model.feature_count + idx] *
          value;
  }
  return logits;
}

void check_model(const ToyModel& model) {
  if (model.classes < 2 || model.feature_count == 0)
    throw std::invalid_argument("toy model is not initialized");
  if (model.weights.size() !=
          static_cast<std::size_t>(model.classes) * model.feature_count ||
      model.bias.size() != static_cast<std::size_t>(model.classes))
    throw std::invalid_argument("toy model has inconsistent shapes");
}

}  // namespace

Probabilities Probabilities::from_probs(std::vector<double> probs) {
  if (probs.empty()) throw std::invalid_argument("empty probability vector");
  double sum = 0.0;
  int argmax = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument("probability vector has invalid entries");
    sum += p;
    if (p > probs[static_cast<std::size_t>(argmax)]) argmax = static_cast<int>(i);
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("probability vector does not sum to 1");
  Probabilities out;
  out.probs = std::move(probs);
  out.predicted = argmax;
  return out;
}

SparseFeatures featurize(const SourceUnit& unit, std::uint32_t feature_count,
                         std::uint64_t seed) {
  if (feature_count == 0)
    throw std::invalid_argument("feature_count must be positive");
  std::map<std::uint32_t, double> counts;
  for (const Token& tok : tokenize(unit)) {
    std::uint64_t h = 0;
    switch (tok.kind) {
      case TokenKind::Identifier:
      case TokenKind::Keyword:
      case TokenKind::Literal:
      case TokenKind::Operator:
      case TokenKind::Punctuation:
        h = hash_bytes(tok.text(unit.code), seed);
        break;
      case TokenKind::String:
        h = hash_bytes("\x01string", seed);
        break;
      case TokenKind::Comment:
        h = hash_bytes("\x01comment", seed);
        break;
      case TokenKind::Whitespace:
        continue;
    }
    counts[static_cast<std::uint32_t>(h % feature_count)] += 1.0;
  }
  return SparseFeatures(counts.begin(), counts.end());
}

double toy_loss(const ToyModel& model, const std::vector<SparseFeatures>& x,
                const std::vector<int>& y) {
  check_model(model);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> p = logits_of(model, x[i]);
    softmax_inplace(p);
    loss += -std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
  }
  loss /= static_cast<double>(x.size());
  const double decay = model.train_config.weight_decay;
  if (decay > 0.0) {
    double sq = 0.0;
    for (double w : model.weights) sq += w * w;
    loss += 0.5 * decay * sq;
  }
  return loss;
}

void toy_gradient(const ToyModel& model, const std::vector<SparseFeatures>& x,
                  const std::vector<int>& y, std::vector<double>& grad_w,
                  std::vector<double>& grad_b) {
  check_model(model);
  grad_w.assign(model.weights.size(), 0.0);
  grad_b.assign(model.bias.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> p = logits_of(model, x[i]);
    softmax_inplace(p);
    for (int c = 0; c < model.classes; ++c) {
      const double err =
          (p[static_cast<std::size_t>(c)] - (y[i] == c ? 1.0 : 0.0)) * inv_n;
      grad_b[static_cast<std::size_t>(c)] += err;
      for (const auto& [idx, value] : x[i])
        grad_w[static_cast<std::size_t>(c) * model.feature_count + idx] +=
            err * value;
    }
  }
  const double decay = model.train_config.weight_decay;
  if (decay > 0.0) {
    for (std::size_t i = 0; i < grad_w.size(); ++i)
      grad_w[i] += decay * model.weights[i];
  }
}

ToyModel train_toy(const std::vector<SourceUnit>& data,
                   const ToyTrainConfig& config) {
  if (config.epochs < 1 || config.learning_rate <= 0.0)
    throw std::invalid_argument("bad training configuration");

  int classes = 0;
  std::map<int, int> per_class;
  for (const SourceUnit& unit : data) {
    if (!unit.label)
      throw std::invalid_argument("training sample without a label");
    if (*unit.label < 0) throw std::invalid_argument("negative class label");
    classes = std::max(classes, *unit.label + 1);
    ++per_class[*unit.label];
  }
  if (classes < 2)
    throw std::invalid_argument("degenerate dataset: need at least 2 classes");
  for (int c = 0; c < classes; ++c) {
    if (per_class[c] < 10)
      throw std::invalid_argument(
          "degenerate dataset: class " + std::to_string(c) +
          " has fewer than 10 samples");
  }

  ToyModel model;
  model.classes = classes;
  model.feature_count = config.feature_count;
  model.feature_seed = mix64(config.seed);
  model.train_config = config;
  model.weights.assign(
      static_cast<std::size_t>(classes) * config.feature_count, 0.0);
  model.bias.assign(static_cast<std::size_t>(classes), 0.0);

  std::vector<SparseFeatures> x;
  std::vector<int> y;
  x.reserve(data.size());
  y.reserve(data.size());
  for (const SourceUnit& unit : data) {
    x.push_back(featurize(unit, model.feature_count, model.feature_seed));
    y.push_back(*unit.label);
  }

  std::vector<double> grad_w, grad_b;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    toy_gradient(model, x, y, grad_w, grad_b);
    for (std::size_t i = 0; i < model.weights.size(); ++i)
      model.weights[i] -= config.learning_rate * grad_w[i];
    for (std::size_t i = 0; i < model.bias.size(); ++i)
      model.bias[i] -= config.learning_rate * grad_b[i];
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> p = logits_of(model, x[i]);
    softmax_inplace(p);
    const auto pred = Probabilities::from_probs(std::move(p)).predicted;
    if (pred == y[i]) ++correct;
  }
  model.train_accuracy = static_cast<double>(correct) / static_cast<double>(x.size());
  model.final_loss = toy_loss(model, x, y);
  return model;
}

Probabilities classify_toy(const ToyModel& model, const SourceUnit& unit) {
  check_model(model);
  std::vector<double> p =
      logits_of(model, featurize(unit, model.feature_count, model.feature_seed));
  softmax_inplace(p);
  return Probabilities::from_probs(std::move(p));
}

std::string serialize_toy(const ToyModel& model) {
  json j = {
      {"format", "rnns-toy-victim"},
      {"version", 1},
      {"classes", model.classes},
      {"feature_count", model.feature_count},
      {"feature_seed", model.feature_seed},
      {"weights", model.weights},
      {"bias", model.bias},
      {"train",
       {{"epochs", model.train_config.epochs},
        {"learning_rate", model.train_config.learning_rate},
        {"weight_decay", model.train_config.weight_decay},
        {"seed", model.train_config.seed},
        {"feature_count", model.train_config.feature_count},
        {"accuracy", model.train_accuracy},
        {"loss", model.final_loss}}},
  };
  return j.dump() + "\n";
}

ToyModel parse_toy(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad victim model file: ") + e.what());
  }
  if (j.value("format", "") != "rnns-toy-victim" || j.value("version", 0) != 1)
    throw std::runtime_error("victim model header missing or unsupported");
  ToyModel model;
  model.classes = j.at("classes").get<int>();
  model.feature_count = j.at("feature_count").get<std::uint32_t>();
  model.feature_seed = j.at("feature_seed").get<std::uint64_t>();
  model.weights = j.at("weights").get<std::vector<double>>();
  model.bias = j.at("bias").get<std::vector<double>>();
  const json& t = j.at("train");
  model.train_config.epochs = t.at("epochs").get<int>();
  model.train_config.learning_rate = t.at("learning_rate").get<double>();
  model.train_config.weight_decay = t.at("weight_decay").get<double>();
  model.train_config.seed = t.at("seed").get<std::uint64_t>();
  model.train_config.feature_count = t.at("feature_count").get<std::uint32_t>();
  model.train_accuracy = t.at("accuracy").get<double>();
  model.final_loss = t.at("loss").get<double>();
  check_model(model);
  return model;
}

void save_toy(const ToyModel& model, const std::string& path) {
  write_text_file(path, serialize_toy(model));
}

ToyModel load_toy(const std::string& path) {
  return parse_toy(read_text_file(path));
}

}  // namespace rnns
