#include <random>

#include "doctest.h"
#include "qgf/encoding.hpp"
#include "support/fixtures.hpp"

using namespace qgf;
using testing::data_path;

namespace {

std::map<std::string, QARecord> golden_records() {
  std::map<std::string, QARecord> out;
  for (const auto& line : testing::lines_of(data_path("golden/records.jsonl"))) {
    QARecord r = parse_record(line);
    out.emplace(r.id, std::move(r));
  }
  return out;
}

const EntityExtractor kDefault = extract_entities_default;

}  // namespace

TEST_CASE("golden inputs for every answer type") {
  const auto records = golden_records();
  const std::string context = testing::slurp(data_path("golden/context.txt"));
  for (const char* id : {"ex", "ab", "mc", "yn0", "yn1", "yn2"}) {
    INFO(id);
    const QARecord& r = records.at(id);
    CHECK(validate_record(r).valid());
    const EncodedExample e = encode(r, EncodingScheme::kPrependAnswer, kDefault);
    CHECK(e.input_text == testing::slurp(data_path(std::string("golden/") + id + ".input.txt")));
    CHECK(e.target_text == r.question);

    // split at the first newline gives back (answer segment, context)
    const auto nl = e.input_text.find('\n');
    REQUIRE(nl != std::string::npos);
    CHECK(e.input_text.substr(0, nl) == answer_segment(r, kDefault));
    CHECK(e.input_text.substr(nl + 1) == context);
  }
}

TEST_CASE("golden baseline schemes") {
  const QARecord r = golden_records().at("ex");
  CHECK(encode(r, EncodingScheme::kHighlight, kDefault).input_text ==
        testing::slurp(data_path("golden/ex.highlight.txt")));
  CHECK(encode(r, EncodingScheme::kSepToken, kDefault).input_text ==
        testing::slurp(data_path("golden/ex.sep.txt")));
}

TEST_CASE("yes/no entity extraction") {
  CHECK(extract_entities_default("Does fire need air to burn?").empty());
  CHECK(extract_entities_default("Did Robert Boyle prove that air is necessary for combustion?") ==
        std::vector<std::string>{"Robert Boyle"});
  CHECK(extract_entities_default("Did John Mayow refine the work of Robert Boyle?") ==
        std::vector<std::string>{"John Mayow", "Robert Boyle"});
  CHECK(extract_entities_default("Was the 1903 prize shared?") == std::vector<std::string>{"1903"});
  CHECK(extract_entities_default("Is Paris's river the Seine?") ==
        std::vector<std::string>{"Paris", "Seine"});
  CHECK(extract_entities_default("").empty());
}

TEST_CASE("entities are deduplicated and must come from the question") {
  CHECK(sanitize_entities("Is Rome in Italy?", {"Rome", "Italy", "Rome", "Spain", ""}) ==
        std::vector<std::string>{"Rome", "Italy"});
  QARecord r = golden_records().at("yn0");
  const EntityExtractor noisy = [](std::string_view) {
    return std::vector<std::string>{"fire", "Fire", "fire"};
  };
  CHECK(answer_segment(r, noisy) == "yes + fire");
}

TEST_CASE("yes/no records need an extractor") {
  CHECK_THROWS_AS(answer_segment(golden_records().at("yn1"), EntityExtractor{}), UnencodableError);
}

TEST_CASE("unencodable inputs") {
  CHECK_THROWS_AS(format_input("", "ctx", EncodingScheme::kPrependAnswer), UnencodableError);
  CHECK_THROWS_AS(format_input("a\nb", "ctx", EncodingScheme::kPrependAnswer), UnencodableError);
  CHECK_THROWS_AS(format_input("zzz", "ctx", EncodingScheme::kHighlight), UnencodableError);
  CHECK_THROWS_AS(format_input("a", "<hl> a <hl>", EncodingScheme::kHighlight), UnencodableError);
}

TEST_CASE("encode_corpus skips unencodable records in order") {
  auto records = golden_records();
  std::vector<QARecord> list{records.at("ex"), records.at("ab"), records.at("mc")};
  const auto res = encode_corpus(list, EncodingScheme::kHighlight, kDefault);
  // "through an experiment" is not in the context
  CHECK(res.counts.encoded == 2);
  CHECK(res.counts.skipped == 1);
  CHECK(res.skipped_ids == std::vector<std::string>{"ab"});
  CHECK(res.examples[0].record_id == "ex");
  CHECK(res.examples[1].record_id == "mc");
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("prepend") == EncodingScheme::kPrependAnswer);
  CHECK(parse_scheme("hl") == EncodingScheme::kHighlight);
  CHECK(parse_scheme("sep") == EncodingScheme::kSepToken);
  CHECK_THROWS_AS(parse_scheme("t5"), Error);
}

TEST_CASE("encoded example JSON round trip") {
  const EncodedExample e{"id", EncodingScheme::kSepToken, "a [SEP] b", "q?"};
  CHECK(parse_example(serialize_example(e)) == e);
}

TEST_CASE("prepend round trip and highlight strip on random records") {
  std::mt19937 rng(8);
  const std::vector<std::string> words = {"alpha", "Beta", "gamma", "delta", "7", "é", "x.y", "<b>"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 15);
  for (int i = 0; i < 300; ++i) {
    std::string context;
    for (int k = len(rng); k > 0; --k) context += (context.empty() ? "" : " ") + words[pick(rng)];
    std::string answer = words[pick(rng)];

    const std::string pre = format_input(answer, context, EncodingScheme::kPrependAnswer);
    const auto nl = pre.find('\n');
    REQUIRE(pre.substr(0, nl) == answer);
    REQUIRE(pre.substr(nl + 1) == context);

    if (context.find(answer) != std::string::npos) {
      const std::string hl = format_input(answer, context, EncodingScheme::kHighlight);
      REQUIRE(strip_highlight(hl) == context);
    }
  }
}
