#include "clozefix/remote_predictor.hpp"

#include <algorithm>

#include "httplib.h"
#include "clozefix/errors.hpp"

namespace clozefix {

RemotePredictor::RemotePredictor(std::string endpoint)
    : RemotePredictor(std::move(endpoint), Options{}) {}

RemotePredictor::RemotePredictor(std::string endpoint, Options options) : options_(options) {
  const auto scheme = endpoint.find("://");
  const auto path_start = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  host_ = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) base_path_ = endpoint.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  const std::size_t limit = std::clamp<std::size_t>(options_.max_in_flight, 1, 1024);
  in_flight_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(limit));

  const auto reply = call("info", nlohmann::json::object());
  try {
    info_.model = reply.at("model").get<std::string>();
    info_.mask_sentinel = reply.at("mask_sentinel").get<std::string>();
    info_.max_tokens = reply.at("max_tokens").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError("bad_response", std::string("malformed info response: ") + e.what());
  }
}

nlohmann::json RemotePredictor::call(const std::string& kind, const nlohmann::json& body) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<1024>* sem;
    ~Release() { sem->release(); }
  } release{in_flight_.get()};

  httplib::Client client(host_);
  if (!client.is_valid()) throw BackendUnavailable("invalid predictor endpoint " + host_);
  const auto secs = static_cast<time_t>(options_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  auto res = client.Post(base_path_ + "/" + kind, body.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable("predictor backend " + host_ + " unreachable: " +
                             httplib::to_string(res.error()));
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) {
    throw RemoteError("bad_response", "non-JSON response with HTTP status " +
                                          std::to_string(res->status));
  }
  if (reply.is_object() && reply.contains("error")) {
    const auto& err = reply["error"];
    throw RemoteError(err.value("code", std::string("unknown")),
                      err.value("message", std::string{}));
  }
  if (res->status != 200) {
    throw RemoteError("http_" + std::to_string(res->status), "unexpected HTTP status");
  }
  return reply;
}

nlohmann::json RemotePredictor::wire_tokens(std::span<const Token> tokens) const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Token& t : tokens) {
    arr.push_back(t.kind == TokenKind::mask_sentinel ? info_.mask_sentinel : t.text);
  }
  return arr;
}

TokenDistribution RemotePredictor::predict(const PredictorQuery& query) const {
  check_query(query.tokens, query.mask_index, query.top_k);
  const auto reply = call("predict", {{"tokens", wire_tokens(query.tokens)},
                                      {"mask_index", query.mask_index},
                                      {"top_k", query.top_k}});
  TokenDistribution dist;
  try {
    for (const auto& c : reply.at("candidates")) {
      dist.candidates.push_back({c.at("token").get<std::string>(), c.at("logprob").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError("bad_response", std::string("malformed predict response: ") + e.what());
  }
  return dist;
}

double RemotePredictor::score_token(std::span<const Token> tokens, std::size_t mask_index,
                                    std::string_view target) const {
  check_query(tokens, mask_index);
  const auto reply = call("score", {{"tokens", wire_tokens(tokens)},
                                    {"mask_index", mask_index},
                                    {"target", std::string(target)}});
  try {
    return reply.at("logprob").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError("bad_response", std::string("malformed score response: ") + e.what());
  }
}

}  // namespace clozefix
