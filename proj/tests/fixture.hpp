#pragma once

// Shared desk-scale fixture: a small generated dataset, a substitute corpus
// built from an independently generated pool, and a trained toy victim.

#include <vector>

#include "rnns/attack.hpp"
#include "rnns/corpus.hpp"
#include "rnns/dataset.hpp"
#include "rnns/victim.hpp"

namespace rnns_test {

struct Fixture {
  rnns::Encoder encoder{rnns::EncoderConfig{}};
  std::vector<rnns::SourceUnit> dataset;
  rnns::SubstituteCorpus corpus;
  rnns::ToyModel model;
};

inline Fixture small_fixture() {
  using namespace rnns;
  Fixture f;

  DatagenConfig data_cfg;
  data_cfg.classes = 2;
  data_cfg.per_class = 12;
  data_cfg.language = Language::Java;
  data_cfg.seed = 7;
  f.dataset = generate_dataset(data_cfg);

  DatagenConfig pool_cfg = data_cfg;
  pool_cfg.per_class = 40;
  pool_cfg.seed = 9;
  f.corpus = corpus_from_units(generate_dataset(pool_cfg), f.encoder);

  ToyTrainConfig train_cfg;
  train_cfg.epochs = 150;
  train_cfg.learning_rate = 0.5;
  train_cfg.feature_count = 8192;
  train_cfg.seed = 3;
  f.model = train_toy(f.dataset, train_cfg);
  return f;
}

}  // namespace rnns_test
