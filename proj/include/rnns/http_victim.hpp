#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "rnns/victim.hpp"

namespace rnns {

// Connection-level failures (refused, reset, timeout).
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The endpoint answered, but not with a valid classification response.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// POST /classify with {"code":..., "lang":...}; expects {"probs":[...]}.
Probabilities http_classify(const std::string& endpoint, const SourceUnit& unit);

class HttpVictim : public VictimInterface {
 public:
  explicit HttpVictim(std::string endpoint) : endpoint_(std::move(endpoint)) {}

  Probabilities classify(const SourceUnit& unit) override {
    return http_classify(endpoint_, unit);
  }
  int num_labels() const override;

 private:
  std::string endpoint_;
  mutable int cached_labels_ = 0;
};

// Serves a toy model over the wire protocol. Blocking; used by the CLI.
void serve_victim(const ToyModel& model, const std::string& host, int port);

// Test harness: serves on an ephemeral port in a background thread and shuts
// down on destruction.
class VictimServer {
 public:
  VictimServer(ToyModel model, const std::string& host = "127.0.0.1");
  ~VictimServer();

  VictimServer(const VictimServer&) = delete;
  VictimServer& operator=(const VictimServer&) = delete;

  int port() const { return port_; }
  std::string endpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace rnns
