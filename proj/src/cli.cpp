#include "qgf/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qgf/checksum.hpp"
#include "qgf/encoding.hpp"
#include "qgf/evaluation.hpp"
#include "qgf/inference_clients.hpp"
#include "qgf/ingestion.hpp"
#include "qgf/mixing.hpp"
#include "qgf/pipeline.hpp"

namespace qgf::cli {

namespace {

namespace fs = std::filesystem;

// Bad flag combinations found after CLI11 has parsed.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct EndpointFlags {
  long long timeout_ms = 30000;
  int max_attempts = 3;
  long long backoff_ms = 500;

  EndpointConfig endpoint(const std::string& url) const {
    EndpointConfig c;
    c.url = url;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_attempts = max_attempts;
    c.backoff_initial = std::chrono::milliseconds(backoff_ms);
    return c;
  }
};

void add_endpoint_flags(CLI::App* sub, EndpointFlags& f) {
  sub->add_option("--timeout-ms", f.timeout_ms, "Per-request timeout in milliseconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-attempts", f.max_attempts, "Attempts per request (retry on 5xx)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--backoff-ms", f.backoff_ms, "Initial retry delay, doubled per retry")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

struct DecodeFlags {
  int max_output_tokens = 64;
  int beam = 4;
};

void add_decode_flags(CLI::App* sub, DecodeFlags& f) {
  sub->add_option("--max-output-tokens", f.max_output_tokens, "Generation length limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--beam", f.beam, "Beam width (1 = greedy)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

struct IngestFlags {
  std::string input;
  std::string format;
  std::string dataset;
  std::string split = "train";
  std::string answer_type = "EXTRACTIVE";
  std::string type_label;
  std::string output;
  std::string manifest;
  std::vector<std::string> disable_filters;
  std::vector<std::string> cloze_markers;
  std::size_t max_errors_shown = 20;
};

struct StatsFlags {
  std::vector<std::string> manifests;
  std::string format = "table";
  std::string output;
};

struct EncodeFlags {
  std::string input;
  std::string output;
  std::string scheme = "prepend";
  bool no_entities = false;
};

struct MixFlags {
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 0;
  std::optional<std::size_t> expected_total;
  bool allow_dev = false;
  std::string summary;
  std::string training_manifest;
  TrainingConfig training;
};

struct EvalFlags {
  std::string predictions;
  std::string references;
  std::string output;
  std::string csv;
  std::string metrics = "all";
  std::string tokenizer = "default";
  int bleu_max_n = 4;
  bool bleu_smooth = false;
  bool no_stem = false;
  bool idf = false;
  std::string emb_url;
  std::size_t batch_size = 32;
  unsigned threads = 1;
  EndpointFlags endpoint;
};

struct GenerateFlags {
  std::string answer;
  std::string context;
  std::string context_file;
  std::vector<std::string> entities;
  std::string scheme = "prepend";
  std::string gen_url;
  DecodeFlags decode;
  EndpointFlags endpoint;
};

struct PipelineFlags {
  std::string document;
  std::string output;
  std::string errors_output;
  std::string summarizer_url;
  std::string gen_url;
  std::string scheme = "prepend";
  std::size_t parallelism = 4;
  std::optional<std::size_t> window;
  int summary_max_tokens = 256;
  DecodeFlags decode;
  EndpointFlags endpoint;
};

struct Flags {
  std::string config;
  IngestFlags ingest;
  StatsFlags stats;
  EncodeFlags encode;
  MixFlags mix;
  EvalFlags eval;
  GenerateFlags generate;
  PipelineFlags pipeline;
};

void build_app(CLI::App& app, Flags& f) {
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", f.config, "TOML file of flag values; [section] per subcommand")
      ->check(CLI::ExistingFile);

  auto* ingest = app.add_subcommand("ingest", "Read a source dataset into unified JSONL + manifest");
  auto& in = f.ingest;
  ingest->add_option("--input", in.input, "Source file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", in.format, "span | mc | boolean | unified")->required();
  ingest->add_option("--dataset", in.dataset, "Dataset name stored on every record")->required();
  ingest->add_option("--split", in.split, "train | dev")->capture_default_str();
  ingest->add_option("--answer-type", in.answer_type,
                     "Answer type for span sources (EXTRACTIVE | ABSTRACTIVE)")
      ->capture_default_str();
  ingest->add_option("--type-label", in.type_label, "Type column shown by stats");
  ingest->add_option("--output", in.output, "Unified JSONL output")->required();
  ingest->add_option("--manifest", in.manifest, "Manifest path (default <output>.manifest.json)");
  ingest->add_option("--disable-filter", in.disable_filters,
                     "Turn off a filter rule: cloze | unanswerable | non_self_contained_mc");
  ingest->add_option("--cloze-marker", in.cloze_markers, "Replace the cloze blank markers");
  ingest->add_option("--max-errors-shown", in.max_errors_shown, "Per-line errors echoed to stderr")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Summarize manifests as a dataset statistics table");
  stats->add_option("--manifest", f.stats.manifests, "Manifest file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--format", f.stats.format, "table | json | csv")->capture_default_str();
  stats->add_option("--output", f.stats.output, "Write the summary here instead of stdout");

  auto* encode = app.add_subcommand("encode", "Unified JSONL -> encoded model inputs");
  encode->add_option("--input", f.encode.input, "Unified JSONL")->required()->check(CLI::ExistingFile);
  encode->add_option("--output", f.encode.output, "Encoded JSONL")->required();
  encode->add_option("--scheme", f.encode.scheme, "prepend | highlight | sep")->capture_default_str();
  encode->add_flag("--no-entities", f.encode.no_entities,
                   "Do not append question entities to yes/no answers");

  auto* mix = app.add_subcommand("mix", "Concatenate and shuffle encoded corpora");
  auto& mx = f.mix;
  mix->add_option("--input", mx.inputs, "PATH, NAME=PATH or NAME:SPLIT=PATH (repeatable)")
      ->required();
  mix->add_option("--output", mx.output, "Mixed corpus")->required();
  mix->add_option("--seed", mx.seed, "Shuffle seed")->capture_default_str();
  mix->add_option("--expected-total", mx.expected_total, "Warn when the total differs");
  mix->add_flag("--allow-dev", mx.allow_dev, "Accept dev-split inputs");
  mix->add_option("--summary", mx.summary, "Mix summary (default <output>.mix.json)");
  mix->add_option("--training-manifest", mx.training_manifest,
                  "Training manifest (default <output>.training.json)");
  mix->add_option("--steps", mx.training.steps, "Training steps")->capture_default_str();
  mix->add_option("--learning-rate", mx.training.learning_rate, "Learning rate")
      ->capture_default_str();
  mix->add_option("--optimizer", mx.training.optimizer, "Optimizer")->capture_default_str();
  mix->add_option("--base-checkpoint", mx.training.base_checkpoint, "Initial checkpoint")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  auto& ev = f.eval;
  eval->add_option("--predictions", ev.predictions, "JSONL {id, hypothesis}")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--references", ev.references, "JSONL {id, references}")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--output", ev.output, "Report JSON")->required();
  eval->add_option("--csv", ev.csv, "Also write a CSV header + row");
  eval->add_option("--metrics", ev.metrics, "Comma list of BLEU,R1,R2,RL,RLsum,METEOR,BERTScore")
      ->capture_default_str();
  eval->add_option("--tokenizer", ev.tokenizer, "default | as_is")->capture_default_str();
  eval->add_option("--bleu-max-n", ev.bleu_max_n, "Highest BLEU n-gram order")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_flag("--bleu-smooth", ev.bleu_smooth, "Epsilon-smooth zero BLEU counts");
  eval->add_flag("--no-stem", ev.no_stem, "METEOR exact stage only");
  eval->add_flag("--idf", ev.idf, "idf-weight BERTScore over the references");
  eval->add_option("--emb-url", ev.emb_url, "Embedding endpoint")->envname("QGF_EMB_URL");
  eval->add_option("--batch-size", ev.batch_size, "Texts per /embed request")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_option("--threads", ev.threads, "Scoring threads (0 = all cores)")
      ->capture_default_str();
  add_endpoint_flags(eval, ev.endpoint);

  auto* gen = app.add_subcommand("generate", "Generate one question for an answer and context");
  auto& g = f.generate;
  gen->add_option("--answer", g.answer, "Target answer")->required();
  auto* ctx = gen->add_option("--context", g.context, "Context passage");
  auto* ctx_file = gen->add_option("--context-file", g.context_file, "Read the context from a file")
                       ->check(CLI::ExistingFile);
  ctx->excludes(ctx_file);
  gen->add_option("--entity", g.entities, "Entity appended to a yes/no answer (repeatable)");
  gen->add_option("--scheme", g.scheme, "prepend | highlight | sep")->capture_default_str();
  gen->add_option("--gen-url", g.gen_url, "Generation endpoint")->envname("QGF_GEN_URL");
  add_decode_flags(gen, g.decode);
  add_endpoint_flags(gen, g.endpoint);

  auto* pipe = app.add_subcommand("pipeline", "Summarize a document, then ask one question per summary sentence");
  auto& p = f.pipeline;
  pipe->add_option("--document", p.document, "Document text file")
      ->required()
      ->check(CLI::ExistingFile);
  pipe->add_option("--output", p.output, "QA pair JSONL")->required();
  pipe->add_option("--errors-output", p.errors_output,
                   "Per-sentence failures (default <output>.errors.jsonl)");
  pipe->add_option("--summarizer-url", p.summarizer_url, "Summarization endpoint")
      ->envname("QGF_SUM_URL");
  pipe->add_option("--gen-url", p.gen_url, "Question generation endpoint")->envname("QGF_GEN_URL");
  pipe->add_option("--scheme", p.scheme, "prepend | highlight | sep")->capture_default_str();
  pipe->add_option("--parallelism", p.parallelism, "Concurrent generation calls")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  pipe->add_option("--window", p.window,
                   "Use the best-matching document sentence +/- this many as context");
  pipe->add_option("--summary-max-tokens", p.summary_max_tokens, "Summary length limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_decode_flags(pipe, p.decode);
  add_endpoint_flags(pipe, p.endpoint);
}

// ------------------------------------------------------------------ config

std::optional<std::string> config_path_from_args(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

std::string subcommand_from_args(const CLI::App& app, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (!args[i].empty() && args[i][0] == '-') continue;
    for (const auto* sub : app.get_subcommands({})) {
      if (sub->get_name() == args[i]) return args[i];
    }
    return {};
  }
  return {};
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& lname) {
  const std::string flag = "--" + lname;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

CLI::Option* find_long_option(CLI::App* sub, std::string name) {
  std::replace(name.begin(), name.end(), '_', '-');
  for (auto* opt : sub->get_options()) {
    for (const auto& l : opt->get_lnames()) {
      if (l == name && l != "help" && l != "config") return opt;
    }
  }
  return nullptr;
}

// Appends config-file values for options that neither the command line nor
// the environment supplies, so CLI11 sees them as ordinary flags.
std::vector<std::string> with_config(const CLI::App& app, const std::vector<std::string>& args,
                                     const std::string& subcommand) {
  const auto path = config_path_from_args(args);
  if (!path || subcommand.empty()) return args;
  std::ifstream in(*path);
  if (!in) throw CLI::FileError::Missing(*path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw CLI::ConversionError(*path + ": " + e.what());
  }
  auto* sub = app.get_subcommand(subcommand);
  std::vector<std::string> out = args;
  std::set<std::string> applied;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() > 1) {
      throw CLI::ConversionError(*path + ": nested section '" + item.fullname() + "'");
    }
    const std::string section = item.parents.empty() ? "" : item.parents.front();
    if (!section.empty() && section != subcommand) {
      bool known = false;
      for (const auto* s : app.get_subcommands({})) known = known || s->get_name() == section;
      if (!known) throw CLI::ConversionError(*path + ": unknown section [" + section + "]");
      continue;
    }
    CLI::Option* opt = find_long_option(sub, item.name);
    if (opt == nullptr) {
      if (section.empty()) continue;  // top-level keys may belong to another subcommand
      throw CLI::ConversionError(*path + ": unknown key '" + item.fullname() + "'");
    }
    const std::string lname = opt->get_lnames().front();
    if (!applied.insert(lname).second) continue;  // section value seen first wins
    if (given_on_command_line(args, lname)) continue;
    const std::string env = opt->get_envname();
    if (!env.empty() && std::getenv(env.c_str()) != nullptr) continue;
    if (opt->get_type_size() == 0) {
      if (!item.inputs.empty() && CLI::detail::to_flag_value(item.inputs.front()) > 0) {
        out.push_back("--" + lname);
      }
      continue;
    }
    for (const auto& v : item.inputs) out.push_back("--" + lname + "=" + v);
  }
  return out;
}

std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

// Records every option that received a value, whatever its source.
std::string config_snapshot(const CLI::App* sub) {
  std::ostringstream os;
  os << "[" << sub->get_name() << "]\n";
  for (const auto* opt : sub->get_options()) {
    const auto& lnames = opt->get_lnames();
    if (lnames.empty() || lnames.front() == "help" || lnames.front() == "config") continue;
    if (opt->count() == 0) continue;
    const std::string& name = lnames.front();
    if (opt->get_type_size() == 0) {
      os << name << " = true\n";
      continue;
    }
    const auto& results = opt->results();
    if (opt->get_expected_max() > 1 || results.size() > 1) {
      os << name << " = [";
      for (std::size_t i = 0; i < results.size(); ++i) {
        os << (i ? ", " : "") << toml_string(results[i]);
      }
      os << "]\n";
    } else if (!results.empty()) {
      os << name << " = " << toml_string(results.front()) << "\n";
    }
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

void write_snapshot(const CLI::App* sub, const std::string& output) {
  write_text(output + ".config.toml", config_snapshot(sub));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

std::string with_commas(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// ------------------------------------------------------------ subcommands

int do_ingest(const IngestFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  IngestOptions options;
  const SourceFormat format = as_usage([&] { return parse_source_format(f.format); });
  options.dataset = f.dataset;
  options.split = as_usage([&] { return parse_split(f.split); });
  options.answer_type = as_usage([&] { return parse_answer_type(f.answer_type); });
  options.type_label = f.type_label;
  for (const auto& rule : f.disable_filters) {
    options.filters.set_enabled(as_usage([&] { return parse_filter_rule(rule); }), false);
  }
  if (!f.cloze_markers.empty()) options.filters.cloze_markers = f.cloze_markers;

  std::ifstream in(f.input, std::ios::binary);
  if (!in) throw Error("cannot open '" + f.input + "'");
  std::ofstream records = open_output(f.output);
  const IngestSummary summary = ingest(format, in, options, [&](const QARecord& r) {
    records << serialize_record(r) << '\n';
  });
  records.close();
  if (!records) throw Error("write to '" + f.output + "' failed");

  const std::string manifest_path = f.manifest.empty() ? f.output + ".manifest.json" : f.manifest;
  write_manifest(summary.manifest, manifest_path);
  write_snapshot(sub, f.output);

  const auto& m = summary.manifest;
  out << m.dataset << " " << to_string(m.split) << ": read " << m.raw_examples_read
      << ", accepted " << m.accepted_count << ", rejected " << m.rejected_total() << "\n";
  for (const auto& [reason, n] : m.rejected) out << "  " << reason << ": " << n << "\n";
  std::size_t shown = 0;
  for (const auto& e : summary.errors) {
    if (shown++ == f.max_errors_shown) {
      err << "  ... " << summary.errors.size() - f.max_errors_shown << " more\n";
      break;
    }
    err << f.input << ":" << e.line << ": " << e.message << "\n";
  }
  return kExitOk;
}

int do_stats(const StatsFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  if (f.format != "table" && f.format != "json" && f.format != "csv") {
    throw UsageError("unknown stats format '" + f.format + "'");
  }
  struct Row {
    std::string dataset;
    std::string type;
    std::optional<std::size_t> train;
    std::optional<std::size_t> dev;
  };
  std::vector<Row> rows;
  std::size_t train_total = 0;
  std::size_t dev_total = 0;
  for (const auto& path : f.manifests) {
    const CorpusManifest m = read_manifest(path);
    if (!m.conserves()) {
      err << "warning: " << path << ": read " << m.raw_examples_read << " != accepted "
          << m.accepted_count << " + rejected " << m.rejected_total() << "\n";
    }
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) { return r.dataset == m.dataset; });
    if (it == rows.end()) {
      rows.push_back({m.dataset, m.type_label, {}, {}});
      it = rows.end() - 1;
    }
    auto& slot = m.split == Split::kTrain ? it->train : it->dev;
    if (slot) throw Error(path + ": second " + std::string(to_string(m.split)) + " manifest for " + m.dataset);
    slot = m.accepted_count;
    (m.split == Split::kTrain ? train_total : dev_total) += m.accepted_count;
  }

  std::ostringstream os;
  auto cell = [](const std::optional<std::size_t>& v) { return v ? with_commas(*v) : std::string("-"); };
  if (f.format == "json") {
    nlohmann::ordered_json j;
    j["datasets"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["dataset"] = r.dataset;
      row["type"] = r.type;
      row["train"] = r.train ? nlohmann::ordered_json(*r.train) : nlohmann::ordered_json(nullptr);
      row["dev"] = r.dev ? nlohmann::ordered_json(*r.dev) : nlohmann::ordered_json(nullptr);
      j["datasets"].push_back(row);
    }
    j["total"] = {{"train", train_total}, {"dev", dev_total}};
    os << j.dump(2) << "\n";
  } else if (f.format == "csv") {
    os << "dataset,type,train,dev\n";
    for (const auto& r : rows) {
      os << r.dataset << "," << r.type << "," << (r.train ? std::to_string(*r.train) : "") << ","
         << (r.dev ? std::to_string(*r.dev) : "") << "\n";
    }
    os << "Total,," << train_total << "," << dev_total << "\n";
  } else {
    std::size_t w0 = 7;
    std::size_t w1 = 4;
    for (const auto& r : rows) {
      w0 = std::max(w0, r.dataset.size());
      w1 = std::max(w1, r.type.size());
    }
    auto line = [&](const std::string& a, const std::string& b, const std::string& c,
                    const std::string& d) {
      os << a << std::string(w0 - a.size() + 2, ' ') << b << std::string(w1 - b.size() + 2, ' ')
         << std::string(c.size() < 14 ? 14 - c.size() : 0, ' ') << c << "  "
         << std::string(d.size() < 12 ? 12 - d.size() : 0, ' ') << d << "\n";
    };
    line("Dataset", "Type", "Train examples", "Dev examples");
    for (const auto& r : rows) line(r.dataset, r.type, cell(r.train), cell(r.dev));
    line("Total", "", with_commas(train_total), with_commas(dev_total));
  }

  if (f.output.empty()) {
    out << os.str();
  } else {
    write_text(f.output, os.str());
    write_snapshot(sub, f.output);
  }
  return kExitOk;
}

int do_encode(const EncodeFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  const EncodingScheme scheme = as_usage([&] { return parse_scheme(f.scheme); });
  std::ifstream in(f.input, std::ios::binary);
  if (!in) throw Error("cannot open '" + f.input + "'");
  std::vector<QARecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      records.push_back(parse_record(line));
    } catch (const std::exception& e) {
      throw Error(f.input + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  const EntityExtractor extractor =
      f.no_entities ? EntityExtractor([](std::string_view) { return std::vector<std::string>{}; })
                    : EntityExtractor(extract_entities_default);
  const EncodeCorpusResult result = encode_corpus(records, scheme, extractor);
  std::ofstream o = open_output(f.output);
  for (const auto& e : result.examples) o << serialize_example(e) << '\n';
  o.close();
  if (!o) throw Error("write to '" + f.output + "' failed");
  write_snapshot(sub, f.output);
  out << "encoded " << result.counts.encoded << ", skipped " << result.counts.skipped << "\n";
  for (const auto& id : result.skipped_ids) err << "skipped unencodable record " << id << "\n";
  return kExitOk;
}

MixInput parse_mix_input(const std::string& arg) {
  MixInput input;
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    input.path = arg;
    input.dataset = fs::path(arg).stem().string();
    return input;
  }
  std::string name = arg.substr(0, eq);
  input.path = arg.substr(eq + 1);
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    input.split = parse_split(name.substr(colon + 1));
    name = name.substr(0, colon);
  }
  if (name.empty() || input.path.empty()) throw Error("bad --input '" + arg + "'");
  input.dataset = name;
  return input;
}

int do_mix(const MixFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  MixPlan plan;
  plan.seed = f.seed;
  plan.expected_total = f.expected_total;
  for (const auto& arg : f.inputs) {
    MixInput input = as_usage([&] { return parse_mix_input(arg); });
    if (input.split == Split::kDev && !f.allow_dev) {
      throw UsageError("dev-split input '" + arg + "' needs --allow-dev");
    }
    plan.inputs.push_back(std::move(input));
  }
  const MixSummary summary = mix(plan, f.output);
  const std::string summary_path = f.summary.empty() ? f.output + ".mix.json" : f.summary;
  write_text(summary_path, summary_to_json(summary).dump(2) + "\n");
  const std::string manifest_path =
      f.training_manifest.empty() ? f.output + ".training.json" : f.training_manifest;
  emit_training_manifest(f.training, f.output, manifest_path);
  write_snapshot(sub, f.output);
  out << "mixed " << summary.total << " examples from " << summary.per_input.size()
      << " inputs, sha256 " << summary.checksum << "\n";
  for (const auto& w : summary.warnings) err << "warning: " << w << "\n";
  return kExitOk;
}

int do_eval(const EvalFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  EvalConfig config;
  config.metrics = as_usage([&] { return parse_metric_list(f.metrics); });
  config.tokenizer = as_usage([&] { return parse_tokenizer_mode(f.tokenizer); });
  config.bleu.max_n = f.bleu_max_n;
  config.bleu.smooth = f.bleu_smooth;
  config.meteor.stem_stage = !f.no_stem;
  config.bertscore_idf = f.idf;
  config.threads = f.threads;

  std::vector<std::string> warnings;
  const auto pairs =
      join_predictions(read_predictions(f.predictions), read_references(f.references), &warnings);
  std::unique_ptr<EmbeddingClient> embedder;
  if (!f.emb_url.empty()) {
    embedder = std::make_unique<EmbeddingClient>(f.endpoint.endpoint(f.emb_url), f.batch_size);
  }
  MetricReport report = evaluate_corpus(pairs, config, embedder.get());
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());

  write_text(f.output, report_to_json(report, config).dump(2) + "\n");
  const std::string csv = csv_header(report.metrics) + "\n" + csv_row(report) + "\n";
  if (!f.csv.empty()) write_text(f.csv, csv);
  write_snapshot(sub, f.output);
  out << csv;
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int do_generate(const GenerateFlags& f, std::ostream& out) {
  if (f.gen_url.empty()) throw UsageError("--gen-url (or QGF_GEN_URL) is required");
  const EncodingScheme scheme = as_usage([&] { return parse_scheme(f.scheme); });
  const std::string context = normalize_text(f.context_file.empty() ? f.context : read_file(f.context_file));
  if (context.empty()) throw UsageError("--context or --context-file is required");
  std::string answer = normalize_text(f.answer);
  if (!f.entities.empty()) answer = yes_no_segment(answer, f.entities);
  const GenerationClient client(f.endpoint.endpoint(f.gen_url));
  out << generate_question(answer, context, scheme, client,
                           {f.decode.max_output_tokens, f.decode.beam})
      << "\n";
  return kExitOk;
}

int do_pipeline(const PipelineFlags& f, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  if (f.summarizer_url.empty()) throw UsageError("--summarizer-url (or QGF_SUM_URL) is required");
  if (f.gen_url.empty()) throw UsageError("--gen-url (or QGF_GEN_URL) is required");
  PipelineOptions options;
  options.scheme = as_usage([&] { return parse_scheme(f.scheme); });
  options.decode = {f.decode.max_output_tokens, f.decode.beam};
  options.summary_decode = {f.summary_max_tokens, f.decode.beam};
  options.parallelism = f.parallelism;
  options.window = f.window;
  const GenerationClient summarizer(f.endpoint.endpoint(f.summarizer_url));
  const GenerationClient qg(f.endpoint.endpoint(f.gen_url));

  const PipelineResult result = summarize_then_qg(read_file(f.document), summarizer, qg, options);
  std::ofstream o = open_output(f.output);
  for (const auto& p : result.pairs) o << pair_to_json(p).dump() << '\n';
  o.close();
  const std::string errors_path = f.errors_output.empty() ? f.output + ".errors.jsonl" : f.errors_output;
  std::ofstream e = open_output(errors_path);
  for (const auto& x : result.errors) e << error_to_json(x).dump() << '\n';
  e.close();
  if (!o || !e) throw Error("writing pipeline output failed");
  write_snapshot(sub, f.output);
  out << result.pairs.size() << " question(s), " << result.errors.size() << " failure(s)\n";
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  for (const auto& x : result.errors) {
    err << "sentence " << x.sentence_index << " failed: " << x.message << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Question generation corpus toolkit", "qgf"};
  Flags flags;
  build_app(app, flags);
  const std::string subcommand = subcommand_from_args(app, args);
  auto help_target = [&]() -> const CLI::App* {
    return subcommand.empty() ? &app : app.get_subcommand(subcommand);
  };

  try {
    std::vector<std::string> argv = with_config(app, args, subcommand);
    std::reverse(argv.begin(), argv.end());
    app.parse(std::move(argv));
  } catch (const CLI::CallForHelp&) {
    out << help_target()->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << help_target()->help();
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string& name = sub->get_name();
  try {
    if (name == "ingest") return do_ingest(flags.ingest, sub, out, err);
    if (name == "stats") return do_stats(flags.stats, sub, out, err);
    if (name == "encode") return do_encode(flags.encode, sub, out, err);
    if (name == "mix") return do_mix(flags.mix, sub, out, err);
    if (name == "eval") return do_eval(flags.eval, sub, out, err);
    if (name == "generate") return do_generate(flags.generate, out);
    if (name == "pipeline") return do_pipeline(flags.pipeline, sub, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << "error: unhandled subcommand '" << name << "'\n";
  return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace qgf::cli
