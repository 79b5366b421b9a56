// semlock: command-line front end for corpus handling, icon selection,
// strength analytics and the authentication service.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semlock/corpus.hpp"
#include "semlock/error.hpp"
#include "semlock/icon_analysis.hpp"
#include "semlock/model.hpp"
#include "semlock/service.hpp"
#include "semlock/strength.hpp"

namespace {

using namespace semlock;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string format = "csv";
  std::string out;
  std::string in;
  std::string kind;
  std::string layout;
  std::uint64_t seed = 42;
  std::size_t count = 1000;
  std::string profile = "uniform";
  bool strict = false;
  bool dedupe = false;

  // enumerate
  std::uint64_t icons = 6;
  std::uint64_t moves = 2;
  bool count_only = false;
  std::uint64_t cap = kDefaultSpaceCap;

  // icon selection
  std::size_t k = 6;
  std::string mode = "exact";
  std::string objective = "sum";
  std::string what = "icons";

  // models and guesswork
  double delta = 0.01;
  std::string model;
  std::optional<std::size_t> uniform;
  std::vector<double> alphas = {0.1, 0.2, 0.5};
  std::optional<std::size_t> max_attempts;
  std::string which = "start";

  // serve
  std::string config;
  std::string bind;
  std::optional<int> port;
  std::string data;
  std::string static_dir;
};

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(opt.out, text);
  }
}

GridSpec layout_of(const Options& opt) {
  return opt.layout.empty() ? GridSpec::default_layout() : grid_from_json(read_file(opt.layout));
}

template <typename T>
std::vector<T> take_records(LoadResult<T> result, const std::string& path) {
  if (!result.rejections.empty()) {
    std::cerr << path << ": skipped " << result.rejections.size()
              << " invalid line(s); run `semlock validate` for details\n";
  }
  return std::move(result.records);
}

std::vector<PasswordRecord> passwords_of(const Options& opt, const IconSet& icons) {
  auto records = take_records(load_passwords(opt.in, icons, {opt.strict}), opt.in);
  if (opt.dedupe) records = dedupe_per_participant(records);
  return records;
}

std::vector<PatternRecord> patterns_of(const Options& opt) {
  return take_records(load_patterns(opt.in, {opt.strict}), opt.in);
}

bool is_pattern_kind(const Options& opt) {
  if (opt.kind == "patterns") return true;
  if (opt.kind.empty() || opt.kind == "passwords") return false;
  throw Error(ErrorCode::kInvalidArgument, "--kind must be passwords or patterns here");
}

MarkovModel train_from(const Options& opt) {
  std::vector<TokenSequence> corpus;
  if (is_pattern_kind(opt)) {
    for (const auto& r : patterns_of(opt)) corpus.push_back(pattern_tokens(r));
    return train_markov(corpus, pattern_node_tokens(), opt.delta);
  }
  const GridSpec grid = layout_of(opt);
  for (const auto& r : passwords_of(opt, grid.icons())) corpus.push_back(password_tokens(r.password));
  return train_markov(corpus, move_tokens(grid.icons()), opt.delta);
}

RankedDistribution distribution_of(const Options& opt) {
  if (opt.uniform) return RankedDistribution::uniform(*opt.uniform);
  if (opt.model.empty() && opt.in.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need --uniform, --model or --in");
  }
  const MarkovModel model = opt.model.empty() ? train_from(opt) : model_from_json(read_file(opt.model));
  if (model.alphabet() == pattern_node_tokens()) {
    const auto space = enumerate_patterns();
    return rank_patterns(model, space);
  }
  const GridSpec grid = layout_of(opt);
  if (model.alphabet() != move_tokens(grid.icons())) {
    throw Error(ErrorCode::kInvalidArgument, "model alphabet does not match the layout icons");
  }
  std::vector<SemanticPassword> space;
  for (const auto& [k, prior] : model.length_prior()) {
    auto part = enumerate_space(grid.icons(), k, opt.cap - std::min<std::uint64_t>(opt.cap, space.size()));
    std::move(part.begin(), part.end(), std::back_inserter(space));
  }
  return rank_space(model, space);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_enumerate(const Options& opt) {
  if (opt.count_only) {
    emit(opt, std::to_string(theoretical_space(opt.icons, opt.moves)) + "\n");
    return kExitOk;
  }
  const IconSet icons = opt.layout.empty() ? IconSet::generic(opt.icons) : layout_of(opt).icons();
  const auto space = enumerate_space(icons, opt.moves, opt.cap);
  std::string text;
  if (opt.format == "json") {
    json arr = json::array();
    for (const auto& p : space) arr.push_back(canonicalize(p));
    text = arr.dump() + "\n";
  } else {
    for (const auto& p : space) text += canonicalize(p) + "\n";
  }
  emit(opt, text);
  return kExitOk;
}

int cmd_synth(const Options& opt) {
  const CorpusKind kind = corpus_kind_from_string(opt.kind);
  const bool paper_like = opt.profile == "paper-like";
  if (!paper_like && opt.profile != "uniform") {
    throw Error(ErrorCode::kInvalidArgument, "--profile must be uniform or paper-like");
  }
  std::string text;
  switch (kind) {
    case CorpusKind::kPasswords: {
      const GridSpec grid = layout_of(opt);
      const auto profile = paper_like ? PasswordProfile::paper_like(grid.icons().size(), opt.count)
                                      : PasswordProfile::uniform(grid.icons().size(), opt.count);
      const auto records = synthesize_passwords(opt.seed, profile, grid.icons());
      text = to_jsonl<PasswordRecord>(records);
      break;
    }
    case CorpusKind::kPatterns: {
      const auto profile = paper_like ? PatternProfile::top_left_biased(opt.count)
                                      : PatternProfile::uniform(opt.count);
      const auto records = synthesize_patterns(opt.seed, profile);
      text = to_jsonl<PatternRecord>(records);
      break;
    }
    case CorpusKind::kPairs: {
      PairProfile profile;
      profile.record_count = opt.count;
      if (!paper_like) profile.within_group = 0.0;
      const auto records = synthesize_pairs(opt.seed, profile);
      text = to_jsonl<PairObservation>(records);
      break;
    }
    case CorpusKind::kEvents: {
      EventProfile profile;
      profile.record_count = opt.count;
      const auto records = synthesize_events(opt.seed, profile);
      text = to_jsonl<AttemptEvent>(records);
      break;
    }
  }
  emit(opt, text);
  return kExitOk;
}

int cmd_validate(const Options& opt) {
  const CorpusKind kind = corpus_kind_from_string(opt.kind);
  std::size_t accepted = 0;
  std::vector<Rejection> rejections;
  auto collect = [&](auto result) {
    accepted = result.records.size();
    rejections = std::move(result.rejections);
  };
  switch (kind) {
    case CorpusKind::kPairs: collect(load_pairs(opt.in, nullptr, {opt.strict})); break;
    case CorpusKind::kPasswords: collect(load_passwords(opt.in, layout_of(opt).icons(), {opt.strict})); break;
    case CorpusKind::kPatterns: collect(load_patterns(opt.in, {opt.strict})); break;
    case CorpusKind::kEvents: collect(load_events(opt.in, {opt.strict})); break;
  }
  std::ostringstream os;
  if (opt.format == "json") {
    json j;
    j["kind"] = corpus_kind_name(kind);
    j["accepted"] = accepted;
    j["rejected"] = rejections.size();
    json rows = json::array();
    for (const auto& r : rejections) rows.push_back({{"line", r.line}, {"reason", r.reason}});
    j["rejections"] = std::move(rows);
    os << j.dump(2) << '\n';
  } else {
    os << "line,reason\n";
    for (const auto& r : rejections) os << r.line << ",\"" << r.reason << "\"\n";
    os << "# accepted=" << accepted << ",rejected=" << rejections.size() << '\n';
  }
  emit(opt, os.str());
  return rejections.empty() ? kExitOk : kExitValidation;
}

IconSet pair_icons(const std::vector<PairObservation>& records) {
  std::set<IconId> ids;
  for (const auto& r : records) {
    ids.insert(r.first);
    ids.insert(r.second);
  }
  return IconSet(std::vector<IconId>(ids.begin(), ids.end()));
}

int cmd_pairs(const Options& opt) {
  const auto records = take_records(load_pairs(opt.in, nullptr, {opt.strict}), opt.in);
  const IconSet icons = pair_icons(records);
  const CooccurrenceMatrix m = count_pairs(records, icons);
  std::ostringstream os;
  if (opt.format == "json") {
    json counts = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.count(i, j));
      counts.push_back(std::move(row));
    }
    json ids = json::array();
    for (const auto& id : m.icons()) ids.push_back(id.str());
    os << json{{"icons", ids}, {"counts", counts}, {"total", m.total()}}.dump() << '\n';
  } else {
    os << "first,second,count\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        os << m.icons()[i].str() << ',' << m.icons()[j].str() << ',' << m.count(i, j) << '\n';
      }
    }
  }
  emit(opt, os.str());
  return kExitOk;
}

int cmd_select_icons(const Options& opt) {
  const auto records = take_records(load_pairs(opt.in, nullptr, {opt.strict}), opt.in);
  const IconSet icons = pair_icons(records);
  const CooccurrenceMatrix m = count_pairs(records, icons);
  const SelectionMode mode = opt.mode == "greedy" ? SelectionMode::kGreedy : SelectionMode::kExact;
  const SelectionObjective objective =
      opt.objective == "max" ? SelectionObjective::kMax : SelectionObjective::kSum;
  const Selection s = select_least_related(m, opt.k, mode, objective);
  std::ostringstream os;
  if (opt.format == "json") {
    json ids = json::array();
    for (const auto& id : s.icons) ids.push_back(id.str());
    os << json{{"icons", ids}, {"objective", s.objective}, {"mode", opt.mode},
               {"objective_kind", opt.objective}}
              .dump(2)
       << '\n';
  } else {
    os << "icon\n";
    for (const auto& id : s.icons) os << id.str() << '\n';
    os << "# objective=" << s.objective << ",mode=" << opt.mode << '\n';
  }
  emit(opt, os.str());
  return kExitOk;
}

int cmd_uniformity(const Options& opt) {
  const GridSpec grid = layout_of(opt);
  const auto records = passwords_of(opt, grid.icons());
  UniformityReport report;
  if (opt.what == "icons") {
    report = icon_usage(records, grid.icons());
  } else if (opt.what == "pairs") {
    report = pair_usage(records, grid.icons());
  } else if (opt.what == "sides") {
    report = side_usage(records);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--what must be icons, pairs or sides");
  }
  emit(opt, opt.format == "json" ? uniformity_json(report) : uniformity_csv(report));
  return kExitOk;
}

int cmd_train(const Options& opt) {
  emit(opt, model_to_json(train_from(opt)));
  return kExitOk;
}

int cmd_entropy(const Options& opt) {
  const RankedDistribution dist = distribution_of(opt);
  std::vector<GuessworkReport> rows;
  bool skipped = false;
  for (double a : opt.alphas) {
    try {
      rows.push_back(guesswork(dist, a));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAlphaUnreachable) throw;
      // bigram models leak mass onto sequences outside the space
      std::cerr << "skipped alpha " << a << ": " << e.what() << '\n';
      skipped = true;
    }
  }
  emit(opt, opt.format == "json" ? guesswork_json(rows) : guesswork_csv(rows));
  return skipped ? kExitValidation : kExitOk;
}

int cmd_curve(const Options& opt) {
  const RankedDistribution dist = distribution_of(opt);
  const auto curve = guessing_curve(dist, opt.max_attempts.value_or(dist.size()));
  emit(opt, opt.format == "json" ? curve_json(curve) : curve_csv(curve));
  return kExitOk;
}

int cmd_heatmap(const Options& opt) {
  const Endpoint which = opt.which == "end" ? Endpoint::kEnd : Endpoint::kStart;
  std::vector<Cell> cells;
  int cols = 3, rows = 3;
  if (is_pattern_kind(opt)) {
    for (const auto& r : patterns_of(opt)) cells.push_back(pattern_endpoint(r, which));
  } else {
    const GridSpec grid = layout_of(opt);
    cols = grid.cols();
    rows = grid.rows();
    std::size_t off_grid = 0;
    for (const auto& r : passwords_of(opt, grid.icons())) {
      if (auto c = password_endpoint(r.password, grid, which)) {
        cells.push_back(*c);
      } else {
        ++off_grid;
      }
    }
    if (off_grid > 0) std::cerr << off_grid << " password(s) leave the grid; not counted\n";
  }
  const Heatmap h = endpoint_heatmap(cells, cols, rows);
  emit(opt, opt.format == "json" ? heatmap_json(h) : heatmap_csv(h));
  return kExitOk;
}

int cmd_metrics(const Options& opt) {
  const auto events = take_records(load_events(opt.in, {opt.strict}), opt.in);
  const auto m = usability_metrics(events);
  emit(opt, opt.format == "json" ? metrics_json(m) : metrics_csv(m));
  return kExitOk;
}

int cmd_serve(const Options& opt) {
  ServiceConfig config = opt.config.empty() ? ServiceConfig{} : load_service_config(opt.config);
  if (!opt.layout.empty()) config.grid = layout_of(opt);
  if (!opt.data.empty()) config.data_dir = opt.data;
  apply_env_overrides(config);
  if (!opt.bind.empty()) config.bind = opt.bind;
  if (opt.port) config.port = *opt.port;
  if (!opt.static_dir.empty()) config.static_dir = opt.static_dir;
  AuthService service(config);
  std::cerr << "semlock serving on http://" << config.bind << ':' << config.port
            << " (data: " << config.data_dir.string() << ")\n";
  if (!service.listen()) {
    std::cerr << "error: cannot bind " << config.bind << ':' << config.port << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semlock: semantic graphical password engine and strength toolkit"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::string> formats = {"json", "csv"};
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember(formats))
        ->capture_default_str();
    sub->add_option("-o,--out", opt.out, "Output path (default: stdout)");
  };
  auto add_input = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("-i,--in", opt.in, "Input JSON Lines file");
    if (required) o->required()->check(CLI::ExistingFile);
    else o->check(CLI::ExistingFile);
    sub->add_flag("--strict", opt.strict, "Fail on the first invalid line");
  };
  auto add_layout = [&](CLI::App* sub) {
    sub->add_option("--layout", opt.layout, "Layout JSON (default: built-in 9x6 six-icon board)")
        ->check(CLI::ExistingFile);
  };
  auto add_model_source = [&](CLI::App* sub) {
    add_input(sub, false);
    add_layout(sub);
    sub->add_option("--kind", opt.kind, "Corpus kind for --in: passwords|patterns");
    sub->add_option("--delta", opt.delta, "Additive smoothing for --in")->capture_default_str();
    sub->add_option("--model", opt.model, "Trained model JSON")->check(CLI::ExistingFile);
    sub->add_option("--uniform", opt.uniform, "Uniform distribution over N passwords");
    sub->add_option("--cap", opt.cap, "Largest password space to enumerate")->capture_default_str();
    sub->add_flag("--dedupe", opt.dedupe, "Count each participant's repeated password once");
  };

  auto* enumerate = app.add_subcommand("enumerate", "Enumerate or count the theoretical password space");
  enumerate->add_option("--icons", opt.icons, "Icon count n")->capture_default_str();
  enumerate->add_option("--moves", opt.moves, "Moves per password k")->capture_default_str();
  enumerate->add_flag("--count-only", opt.count_only, "Print (4 n (n-1))^k only");
  enumerate->add_option("--cap", opt.cap, "Refuse to list more than this many")->capture_default_str();
  add_layout(enumerate);
  add_format(enumerate);

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  synth->add_option("--kind", opt.kind, "passwords|patterns|pairs|events")->required();
  synth->add_option("--seed", opt.seed)->capture_default_str();
  synth->add_option("--count", opt.count)->capture_default_str();
  synth->add_option("--profile", opt.profile, "uniform|paper-like")->capture_default_str();
  add_layout(synth);
  synth->add_option("-o,--out", opt.out, "Output path (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Validate a corpus and report rejected lines");
  validate->add_option("--kind", opt.kind, "passwords|patterns|pairs|events")->required();
  add_input(validate, true);
  add_layout(validate);
  add_format(validate);

  auto* pairs = app.add_subcommand("pairs", "Icon-pair co-occurrence matrix");
  add_input(pairs, true);
  add_format(pairs);

  auto* select = app.add_subcommand("select-icons", "Select the k least related icons");
  add_input(select, true);
  select->add_option("--k", opt.k)->capture_default_str();
  select->add_option("--mode", opt.mode)->check(CLI::IsMember({"exact", "greedy"}))->capture_default_str();
  select->add_option("--objective", opt.objective)->check(CLI::IsMember({"sum", "max"}))->capture_default_str();
  add_format(select);

  auto* uniformity = app.add_subcommand("uniformity", "Chi-square uniformity of icons, pairs or sides");
  add_input(uniformity, true);
  add_layout(uniformity);
  uniformity->add_option("--what", opt.what)->check(CLI::IsMember({"icons", "pairs", "sides"}))->capture_default_str();
  uniformity->add_flag("--dedupe", opt.dedupe, "Count each participant's repeated password once");
  add_format(uniformity);

  auto* train = app.add_subcommand("train", "Train a first-order Markov model");
  add_input(train, true);
  add_layout(train);
  train->add_option("--kind", opt.kind, "passwords|patterns")->capture_default_str();
  train->add_option("--delta", opt.delta)->capture_default_str();
  train->add_flag("--dedupe", opt.dedupe, "Count each participant's repeated password once");
  train->add_option("-o,--out", opt.out, "Output path (default: stdout)");

  auto* entropy = app.add_subcommand("entropy", "Partial guessing entropy table");
  add_model_source(entropy);
  entropy->add_option("--alpha", opt.alphas, "Comma-separated alpha values")
      ->delimiter(',')
      ->capture_default_str();
  add_format(entropy);

  auto* curve = app.add_subcommand("curve", "Guessing curve (attempts vs cumulative success)");
  add_model_source(curve);
  curve->add_option("--max-attempts", opt.max_attempts);
  add_format(curve);

  auto* heatmap = app.add_subcommand("heatmap", "Start/end point heatmap");
  add_input(heatmap, true);
  add_layout(heatmap);
  heatmap->add_option("--kind", opt.kind, "passwords|patterns")->capture_default_str();
  heatmap->add_option("--which", opt.which)->check(CLI::IsMember({"start", "end"}))->capture_default_str();
  heatmap->add_flag("--dedupe", opt.dedupe, "Count each participant's repeated password once");
  add_format(heatmap);

  auto* metrics = app.add_subcommand("metrics", "Per-technique usability metrics from an event log");
  add_input(metrics, true);
  add_format(metrics);

  auto* serve = app.add_subcommand("serve", "Run the JSON-over-HTTP authentication service");
  serve->add_option("--config", opt.config, "Service config JSON")->check(CLI::ExistingFile);
  add_layout(serve);
  serve->add_option("--bind", opt.bind);
  serve->add_option("--port", opt.port);
  serve->add_option("--data", opt.data, "Data directory (SEMLOCK_DATA overrides)");
  serve->add_option("--static", opt.static_dir, "Directory of static web assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*enumerate) return cmd_enumerate(opt);
    if (*synth) return cmd_synth(opt);
    if (*validate) return cmd_validate(opt);
    if (*pairs) return cmd_pairs(opt);
    if (*select) return cmd_select_icons(opt);
    if (*uniformity) return cmd_uniformity(opt);
    if (*train) return cmd_train(opt);
    if (*entropy) return cmd_entropy(opt);
    if (*curve) return cmd_curve(opt);
    if (*heatmap) return cmd_heatmap(opt);
    if (*metrics) return cmd_metrics(opt);
    if (*serve) return cmd_serve(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
