#pragma once

// Client for a masked-language-model server.
//
// Wire protocol (JSON over HTTP POST, one request kind per path):
//   POST <endpoint>/predict  {"tokens": [..], "mask_index": i, "top_k": k}
//                            -> {"candidates": [{"token": s, "logprob": x}, ..]}
//   POST <endpoint>/score    {"tokens": [..], "mask_index": i, "target": s}
//                            -> {"logprob": x}
//   POST <endpoint>/info     {} -> {"model": s, "mask_sentinel": s, "max_tokens": n}
// Errors come back as {"error": {"code": s, "message": s}}.
//
// Mask sentinels are rewritten to the sentinel the server declares.

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "json.hpp"
#include "clozefix/predictor.hpp"

namespace clozefix {

class RemotePredictor final : public Predictor {
 public:
  struct Options {
    std::size_t max_in_flight = 4;
    std::chrono::seconds timeout{60};
  };

  // Contacts the server for its info; throws BackendUnavailable when it is
  // unreachable.
  explicit RemotePredictor(std::string endpoint);
  RemotePredictor(std::string endpoint, Options options);

  TokenDistribution predict(const PredictorQuery& query) const override;
  double score_token(std::span<const Token> tokens, std::size_t mask_index,
                     std::string_view target) const override;
  PredictorInfo info() const override { return info_; }

 private:
  nlohmann::json call(const std::string& kind, const nlohmann::json& body) const;
  nlohmann::json wire_tokens(std::span<const Token> tokens) const;

  std::string host_;  // scheme://host:port
  std::string base_path_;
  Options options_;
  PredictorInfo info_;
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

}  // namespace clozefix
