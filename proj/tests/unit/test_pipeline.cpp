#include "doctest.h"
#include "qgf/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/mock_server.hpp"

using namespace qgf;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

const std::string kSummary =
    "Boyle proved that air is necessary for combustion. Mayow refined this work. "
    "Nitroaereus is consumed in respiration and combustion.";

EndpointConfig endpoint(const std::string& url) {
  EndpointConfig c;
  c.url = url;
  c.timeout = 2000ms;
  c.max_attempts = 1;
  c.backoff_initial = 1ms;
  return c;
}

// QG mock: the question is "Q: " + the answer segment. Answers listed in
// `fail` get a 500.
void qg_server(testing::MockServer& server, std::vector<std::string> fail = {}) {
  server.on("/generate", [fail](const json& body, httplib::Response& res) {
    const std::string input = body.at("input_text");
    const std::string answer = input.substr(0, input.find('\n'));
    if (std::find(fail.begin(), fail.end(), answer) != fail.end()) {
      res.status = 500;
      return;
    }
    testing::reply_json(res, {{"output_text", " Q: " + answer + " "}});
  });
}

void summary_server(testing::MockServer& server, std::string summary) {
  server.on("/generate", [summary](const json&, httplib::Response& res) {
    testing::reply_json(res, {{"output_text", summary}});
  });
}

std::string document() { return testing::slurp(testing::data_path("pipeline/document.txt")); }

}  // namespace

TEST_CASE("one pair per summary sentence, in order") {
  testing::MockServer sum;
  testing::MockServer qg;
  summary_server(sum, kSummary);
  qg_server(qg);
  sum.start();
  qg.start();

  PipelineOptions options;
  options.parallelism = 3;
  const auto doc = document();
  const auto result = summarize_then_qg(doc, GenerationClient(endpoint(sum.url())),
                                        GenerationClient(endpoint(qg.url())), options);
  CHECK(result.summary == kSummary);
  CHECK(result.errors.empty());
  REQUIRE(result.pairs.size() == 3);
  const auto sentences = split_sentences(kSummary);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(result.pairs[i].answer == sentences[i]);
    CHECK(result.pairs[i].question == "Q: " + sentences[i]);
    CHECK(result.pairs[i].source_span.sentence_index == i);
    CHECK(result.pairs[i].source_span.context_begin == 0);
    CHECK(result.pairs[i].source_span.context_end == normalize_text(doc).size());
  }

  // the summarizer sees the document, the QG model sees answer then context
  CHECK(json::parse(sum.captured().at(0).body).at("input_text") == normalize_text(doc));
  CHECK(json::parse(sum.captured().at(0).body).at("max_output_tokens") == 256);
  for (const auto& c : qg.captured()) {
    const std::string input = json::parse(c.body).at("input_text");
    CHECK(input.substr(input.find('\n') + 1) == normalize_text(doc));
  }
}

TEST_CASE("a failing sentence becomes an error entry") {
  const auto sentences = split_sentences(kSummary);
  testing::MockServer sum;
  testing::MockServer qg;
  summary_server(sum, kSummary);
  qg_server(qg, {sentences[1]});
  sum.start();
  qg.start();

  const auto result = summarize_then_qg(document(), GenerationClient(endpoint(sum.url())),
                                        GenerationClient(endpoint(qg.url())));
  REQUIRE(result.pairs.size() == 2);
  CHECK(result.pairs[0].answer == sentences[0]);
  CHECK(result.pairs[1].answer == sentences[2]);
  CHECK(result.pairs[1].source_span.sentence_index == 2);
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].sentence_index == 1);
  CHECK(result.errors[0].answer == sentences[1]);
  CHECK(result.errors[0].message.find("500") != std::string::npos);
  CHECK(error_to_json(result.errors[0]).at("sentence_index") == 1);
}

TEST_CASE("empty summary yields no pairs and a warning") {
  testing::MockServer sum;
  testing::MockServer qg;
  summary_server(sum, "   ");
  qg_server(qg);
  sum.start();
  qg.start();
  const auto result = summarize_then_qg(document(), GenerationClient(endpoint(sum.url())),
                                        GenerationClient(endpoint(qg.url())));
  CHECK(result.pairs.empty());
  CHECK(result.errors.empty());
  CHECK(result.warnings.size() == 1);
  CHECK(qg.count("/generate") == 0);
}

TEST_CASE("summarizer failure propagates") {
  testing::MockServer sum;
  sum.on("/generate", [](const json&, httplib::Response& res) { res.status = 400; });
  sum.start();
  GenerationClient client(endpoint(sum.url()));
  CHECK_THROWS_AS(summarize_then_qg(document(), client, client), TransportError);
  CHECK_THROWS_AS(summarize_then_qg("  ", client, client), Error);
}

TEST_CASE("windowed context centres on the best matching sentence") {
  testing::MockServer sum;
  testing::MockServer qg;
  summary_server(sum, "Mayow refined this work.");
  qg_server(qg);
  sum.start();
  qg.start();
  PipelineOptions options;
  options.window = 0;
  const std::string doc = normalize_text(document());
  const auto result = summarize_then_qg(doc, GenerationClient(endpoint(sum.url())),
                                        GenerationClient(endpoint(qg.url())), options);
  REQUIRE(result.pairs.size() == 1);
  const auto& span = result.pairs[0].source_span;
  const std::string context = doc.substr(span.context_begin, span.context_end - span.context_begin);
  CHECK(context.starts_with("English chemist John Mayow"));
  CHECK(context.ends_with("nitroaereus."));
  const std::string input = json::parse(qg.captured().at(0).body).at("input_text");
  CHECK(input == "Mayow refined this work.\n" + context);
}

TEST_CASE("pair JSON layout") {
  const QAPair p{"Q?", "A.", {2, 5, 9}};
  CHECK(pair_to_json(p).dump() ==
        R"({"question":"Q?","answer":"A.","source_span":{"sentence_index":2,"context_begin":5,"context_end":9}})");
}
