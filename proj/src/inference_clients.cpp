#include "qgf/inference_clients.hpp"

#include <cmath>
#include <thread>

#include "httplib.h"

namespace qgf {

namespace {

bool retryable(int status) { return status == 0 || status >= 500; }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

JsonHttpClient::JsonHttpClient(EndpointConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw Error("endpoint URL is empty");
  if (config_.max_attempts < 1) throw Error("max_attempts must be >= 1");
  std::string url = config_.url;
  if (url.rfind("https://", 0) == 0) throw Error("https endpoints are not supported: " + url);
  if (url.rfind("http://", 0) != 0) {
    if (url.find("://") != std::string::npos) throw Error("unsupported URL scheme: " + url);
    url = "http://" + url;
  }
  const auto path_start = url.find('/', 7);
  host_ = url.substr(0, path_start);
  if (path_start != std::string::npos) prefix_ = url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

nlohmann::json JsonHttpClient::post(std::string_view path, const nlohmann::json& body) const {
  const std::string payload = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  const std::string target = prefix_ + std::string(path);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);

  int last_status = 0;
  bool last_timeout = false;
  std::string last_message;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double factor = std::pow(config_.backoff_factor, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(
          static_cast<double>(config_.backoff_initial.count()) * factor));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(target, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_timeout = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                     res.error() == httplib::Error::ConnectionTimeout;
      last_message = "POST " + config_.url + std::string(path) + " failed: " +
                     httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_status = res->status;
      last_timeout = false;
      last_message = "POST " + config_.url + std::string(path) + " returned HTTP " +
                     std::to_string(res->status);
      if (!res->body.empty()) last_message += ": " + res->body.substr(0, 200);
      if (!retryable(res->status)) throw TransportError(res->status, last_message);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("reply from " + config_.url + std::string(path) +
                          " is not JSON: " + e.what());
    }
  }
  const std::string suffix = " (" + std::to_string(config_.max_attempts) + " attempts)";
  if (last_timeout) throw TimeoutError(last_message + suffix);
  throw RetryExhaustedError(last_status, config_.max_attempts, last_message + suffix);
}

nlohmann::json request_to_json(const GenerationRequest& request) {
  nlohmann::ordered_json j;
  j["input_text"] = request.input_text;
  j["max_output_tokens"] = request.max_output_tokens;
  j["beam"] = request.beam;
  return j;
}

GenerationResponse GenerationClient::generate(const GenerationRequest& request) const {
  if (request.input_text.empty()) throw Error("generation input_text is empty");
  if (request.beam < 1) throw Error("beam width must be >= 1");
  if (request.max_output_tokens < 1) throw Error("max_output_tokens must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const nlohmann::json reply = http_.post("/generate", request_to_json(request));
  const auto stop = std::chrono::steady_clock::now();
  if (!reply.is_object() || !reply.contains("output_text") || !reply["output_text"].is_string()) {
    throw ProtocolError("/generate reply lacks a string output_text");
  }
  GenerationResponse response;
  response.output_text = reply["output_text"].get<std::string>();
  if (reply.contains("model_id") && reply["model_id"].is_string()) {
    response.model_id = reply["model_id"].get<std::string>();
  }
  response.latency_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return response;
}

std::string generate_question(std::string_view answer, std::string_view context,
                              EncodingScheme scheme, const GenerationClient& client,
                              const DecodeOptions& decode) {
  GenerationRequest request;
  request.input_text = format_input(answer, context, scheme);
  request.max_output_tokens = decode.max_output_tokens;
  request.beam = decode.beam;
  return trim(client.generate(request).output_text);
}

EmbeddingClient::EmbeddingClient(EndpointConfig config, std::size_t batch_size)
    : http_(std::move(config)), batch_size_(batch_size) {
  if (batch_size_ == 0) throw Error("embedding batch size must be >= 1");
}

std::vector<TokenEmbedding> EmbeddingClient::embed(const std::vector<std::string>& texts) {
  std::vector<TokenEmbedding> out;
  out.reserve(texts.size());
  std::size_t dimension = 0;
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const std::size_t end = std::min(texts.size(), start + batch_size_);
    nlohmann::json body;
    body["texts"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                             texts.begin() + static_cast<std::ptrdiff_t>(end));
    const nlohmann::json reply = http_.post("/embed", body);
    const std::size_t n = end - start;
    if (!reply.is_object() || !reply.contains("tokens") || !reply.contains("embeddings") ||
        !reply["tokens"].is_array() || !reply["embeddings"].is_array()) {
      throw ProtocolError("/embed reply lacks tokens/embeddings arrays");
    }
    if (reply["tokens"].size() != n || reply["embeddings"].size() != n) {
      throw ProtocolError("/embed reply has " + std::to_string(reply["tokens"].size()) +
                          " token lists and " + std::to_string(reply["embeddings"].size()) +
                          " matrices for " + std::to_string(n) + " texts");
    }
    for (std::size_t k = 0; k < n; ++k) {
      TokenEmbedding e;
      try {
        e.tokens = reply["tokens"][k].get<std::vector<std::string>>();
        e.vectors = reply["embeddings"][k].get<EmbeddingMatrix>();
      } catch (const nlohmann::json::exception& ex) {
        throw ProtocolError(std::string("/embed reply has a malformed entry: ") + ex.what());
      }
      if (e.tokens.size() != e.vectors.size()) {
        throw ProtocolError("/embed reply: " + std::to_string(e.tokens.size()) + " tokens but " +
                            std::to_string(e.vectors.size()) + " vectors");
      }
      for (const auto& row : e.vectors) {
        if (row.empty()) throw ProtocolError("/embed reply contains an empty vector");
        if (dimension == 0) dimension = row.size();
        if (row.size() != dimension) {
          throw ProtocolError("/embed reply mixes dimensions " + std::to_string(dimension) +
                              " and " + std::to_string(row.size()));
        }
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace qgf
