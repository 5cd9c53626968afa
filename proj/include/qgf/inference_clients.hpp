#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qgf/encoding.hpp"
#include "qgf/evaluation.hpp"

namespace qgf {

/// Non-2xx reply or connection failure. status is 0 when no HTTP reply
/// arrived.
class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class TimeoutError : public TransportError {
 public:
  explicit TimeoutError(const std::string& what) : TransportError(0, what) {}
};

/// Every attempt failed with a retryable error (5xx or no connection).
class RetryExhaustedError : public TransportError {
 public:
  RetryExhaustedError(int status, int attempts, const std::string& what)
      : TransportError(status, what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

/// A 2xx reply whose body does not follow the wire schema.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

struct EndpointConfig {
  std::string url;  // http://host[:port][/prefix]
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff_initial{500};
  double backoff_factor = 2.0;
};

/// POSTs JSON with retry on 5xx and connection errors (exponential backoff).
/// Safe to share between threads; every call opens its own connection.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(EndpointConfig config);

  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string host_;    // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
};

struct GenerationRequest {
  std::string input_text;
  int max_output_tokens = 64;
  int beam = 4;  // 1 means greedy
};

struct GenerationResponse {
  std::string output_text;
  double latency_ms = 0.0;
  std::string model_id;
};

nlohmann::json request_to_json(const GenerationRequest& request);

class GenerationClient {
 public:
  explicit GenerationClient(EndpointConfig config) : http_(std::move(config)) {}

  /// POST /generate. Throws qgf::Error for an invalid request.
  GenerationResponse generate(const GenerationRequest& request) const;

 private:
  JsonHttpClient http_;
};

struct DecodeOptions {
  int max_output_tokens = 64;
  int beam = 4;
};

/// Encodes (answer, context) under `scheme`, sends it and returns the output
/// with surrounding whitespace removed.
std::string generate_question(std::string_view answer, std::string_view context,
                              EncodingScheme scheme, const GenerationClient& client,
                              const DecodeOptions& decode = {});

class EmbeddingClient : public TokenEmbedder {
 public:
  explicit EmbeddingClient(EndpointConfig config, std::size_t batch_size = 32);

  /// POST /embed in batches of batch_size. Throws ProtocolError when counts
  /// or dimensions in a reply are inconsistent.
  std::vector<TokenEmbedding> embed(const std::vector<std::string>& texts) override;

 private:
  JsonHttpClient http_;
  std::size_t batch_size_;
};

}  // namespace qgf
