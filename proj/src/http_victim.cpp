#include "rnns/http_victim.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace rnns {

namespace {

using nlohmann::json;

std::string classify_request_body(const SourceUnit& unit) {
  json j = {{"code", unit.code}, {"lang", std::string(to_string(unit.language))}};
  return j.dump();
}

json handle_classify_body(const ToyModel& model, const std::string& body) {
  json req = json::parse(body);
  SourceUnit unit;
  unit.code = req.at("code").get<std::string>();
  unit.language = language_from_string(req.at("lang").get<std::string>());
  const Probabilities p = classify_toy(model, unit);
  return json{{"probs", p.probs}};
}

void install_routes(httplib::Server& server, const ToyModel& model) {
  server.Post("/classify", [&model](const httplib::Request& req,
                                    httplib::Response& res) {
    try {
      res.set_content(handle_classify_body(model, req.body).dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  server.Get("/labels", [&model](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"classes", model.classes}}.dump(), "application/json");
  });
}

}  // namespace

Probabilities http_classify(const std::string& endpoint, const SourceUnit& unit) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  auto res = client.Post("/classify", classify_request_body(unit),
                         "application/json");
  if (!res)
    throw TransportError("cannot reach victim at " + endpoint + ": " +
                         httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProtocolError("victim at " + endpoint + " answered HTTP " +
                        std::to_string(res->status));
  json j;
  try {
    j = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("victim response is not JSON: ") + e.what());
  }
  std::vector<double> probs;
  try {
    probs = j.at("probs").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("victim response missing probs: ") + e.what());
  }
  try {
    return Probabilities::from_probs(std::move(probs));
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("victim returned an invalid distribution: ") +
                        e.what());
  }
}

int HttpVictim::num_labels() const {
  if (cached_labels_ > 0) return cached_labels_;
  httplib::Client client(endpoint_);
  client.set_connection_timeout(10);
  auto res = client.Get("/labels");
  if (!res)
    throw TransportError("cannot reach victim at " + endpoint_ + ": " +
                         httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProtocolError("victim at " + endpoint_ + " answered HTTP " +
                        std::to_string(res->status));
  try {
    cached_labels_ = json::parse(res->body).at("classes").get<int>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad /labels response: ") + e.what());
  }
  return cached_labels_;
}

void serve_victim(const ToyModel& model, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, model);
  if (!server.listen(host, port))
    throw std::runtime_error("cannot listen on " + host + ":" +
                             std::to_string(port));
}

struct VictimServer::Impl {
  ToyModel model;
  httplib::Server server;
  std::thread thread;
};

VictimServer::VictimServer(ToyModel model, const std::string& host)
    : impl_(std::make_unique<Impl>()) {
  impl_->model = std::move(model);
  install_routes(impl_->server, impl_->model);
  port_ = impl_->server.bind_to_any_port(host);
  if (port_ <= 0) throw std::runtime_error("cannot bind victim server");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

VictimServer::~VictimServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string VictimServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

}  // namespace rnns
