// Copyright 2026 The Nester Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nester/baselines.hpp"
#include "nester/error.hpp"
#include "nester/train.hpp"

namespace nester::cli {
namespace {

using json = nlohmann::json;

// Every recognised key with its default value.
const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"command", "synthesize"},
      {"seed", "0"},
      {"out", "nester-out"},
      {"data.source", "generate"},
      {"data.csv", ""},
      {"data.t_col", "t"},
      {"data.y_col", "y"},
      {"data.y0_col", ""},
      {"data.y1_col", ""},
      {"data.features", ""},
      {"gen.kind", "twins"},
      {"gen.n", "2000"},
      {"gen.d", "10"},
      {"gen.tau", "2"},
      {"gen.heterogeneous", "false"},
      {"gen.outcome_noise", "0.1"},
      {"gen.selection_noise", "0.1"},
      {"gen.selection_bound", "0.1"},
      {"gen.n_rand", "722"},
      {"gen.n_obs", "2490"},
      {"split.train", "0.64"},
      {"split.valid", "0.16"},
      {"split.test", "0.20"},
      {"synth.max_depth", "5"},
      {"synth.max_expansions", "500"},
      {"synth.beta", "5"},
      {"synth.ranges", ""},
      {"synth.algebraic", "add,mul"},
      {"synth.heuristic", "relaxation"},
      {"train.preset", ""},
      {"heuristic.epochs", "10"},
      {"heuristic.batch_size", "64"},
      {"heuristic.lr", "0.01"},
      {"heuristic.restarts", "2"},
      {"heuristic.optimizer", "adam"},
      {"heuristic.head_width", "16"},
      {"heuristic.beta_schedule", "fixed"},
      {"heuristic.beta_start", "1"},
      {"heuristic.beta_end", "10"},
      {"final.epochs", "100"},
      {"final.batch_size", "64"},
      {"final.lr", "0.003"},
      {"final.restarts", "3"},
      {"final.optimizer", "adam"},
      {"final.head_width", "16"},
      {"final.beta_schedule", "fixed"},
      {"final.beta_start", "1"},
      {"final.beta_end", "10"},
      {"baseline.knn_k", "5"},
      {"sweep.depths", "1,2,3,4,5"},
      {"diagnose.samples", "10"},
      {"diagnose.max_depth", "2"},
      {"diagnose.epsilon", "auto"},
  };
  return kDefaults;
}

// Final-training batch size and epochs per dataset family.
const std::map<std::string, std::pair<int, int>>& presets() {
  static const std::map<std::string, std::pair<int, int>> kPresets = {
      {"ihdp", {16, 100}},
      {"twins", {128, 7}},
      {"jobs", {64, 10}},
  };
  return kPresets;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("'" + key + "' must be an integer, got '" + text + "'");
  }
  return value;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_text(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os.precision(6);
  os << *v;
  return os.str();
}

json metrics_row(const ModelMetrics& m) {
  json row;
  row["program"] = m.name;
  row["eps_ate_in"] = optional_number(m.in_sample.eps_ate);
  row["eps_ate_out"] = optional_number(m.out_sample.eps_ate);
  row["sqrt_pehe_in"] = optional_number(m.in_sample.sqrt_eps_pehe);
  row["sqrt_pehe_out"] = optional_number(m.out_sample.sqrt_eps_pehe);
  row["eps_att_in"] = optional_number(m.in_sample.eps_att);
  row["eps_att_out"] = optional_number(m.out_sample.eps_att);
  row["biased_in_sample"] = m.in_sample.biased_in_sample;
  return row;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw ConfigError("cannot write '" + path.string() + "'");
}

struct Prepared {
  Splits splits;
  ObservationalDataset in_sample;
  RegressionData train;
  RegressionData valid;
  EvalContext ctx;
};

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  const ObservationalDataset data = load_dataset(cfg);
  p.splits = split(data, cfg.split_spec());
  p.in_sample = concat(p.splits.train, p.splits.valid);
  p.train = to_regression(p.splits.train);
  p.valid = to_regression(p.splits.valid);
  const Standardization stats = standardization_stats(p.splits.train);
  p.ctx.mu = stats.mu;
  p.ctx.sigma = stats.sigma;
  p.ctx.input_dim = static_cast<int>(data.dim() + 1);
  p.ctx.beta = cfg.get_double("synth.beta");
  return p;
}

ModelMetrics program_metrics(const std::string& name, const SynthResult& r, const Prepared& p) {
  ModelMetrics m;
  m.name = name;
  m.in_sample = evaluate_metrics(predict_ite(r.program, r.params, p.in_sample, p.ctx), p.in_sample,
                                 Scope::kInSample);
  m.out_sample = evaluate_metrics(predict_ite(r.program, r.params, p.splits.test, p.ctx),
                                  p.splits.test, Scope::kOutSample);
  return m;
}

std::vector<ModelMetrics> baseline_metrics(const RunConfig& cfg, const Prepared& p) {
  std::vector<ModelMetrics> rows;
  const int k = cfg.get_int("baseline.knn_k");
  for (BaselineKind kind : {BaselineKind::kOls1, BaselineKind::kOls2, BaselineKind::kKnn}) {
    // Baselines see the same rows as the program: train and valid.
    const BaselineModel model = fit_baseline(kind, p.in_sample, k);
    ModelMetrics m;
    m.name = model.name();
    m.in_sample = evaluate_metrics(baseline_ite(model, p.in_sample), p.in_sample, Scope::kInSample);
    m.in_sample.biased_in_sample = kind == BaselineKind::kKnn;
    m.out_sample = evaluate_metrics(baseline_ite(model, p.splits.test), p.splits.test, Scope::kOutSample);
    rows.push_back(std::move(m));
  }
  return rows;
}

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : cfg.values()) {
    if (k != "out") out[k] = v;
  }
  return out;
}

int run_synthesize(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Grammar grammar = grammar_for(cfg, p.ctx.input_dim);
  const SynthResult result = astar_synthesize(grammar, p.train, p.valid, cfg.synth_config(), p.ctx);
  report(cfg.out_dir(), cfg, &result, {program_metrics(render(result.program), result, p)},
         baseline_metrics(cfg, p));
  return kExitOk;
}

int run_baseline(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  report(cfg.out_dir(), cfg, nullptr, {}, baseline_metrics(cfg, p));
  return kExitOk;
}

int run_depth_sweep(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Grammar grammar = grammar_for(cfg, p.ctx.input_dim);
  json rows = json::array();
  std::ostringstream tsv, text;
  tsv << "depth\teps_ate_in\teps_ate_out\tsqrt_pehe_in\tsqrt_pehe_out\texpansions\tpath_cost\tprogram\n";
  text << "depth sweep\n";
  for (const auto& item : split_list(cfg.get("sweep.depths"))) {
    const int d = parse_int("sweep.depths", item);
    SynthConfig sc = cfg.synth_config();
    sc.max_depth = d;
    const SynthResult r = astar_synthesize(grammar, p.train, p.valid, sc, p.ctx);
    const ModelMetrics m = program_metrics(render(r.program), r, p);
    json row = metrics_row(m);
    row["depth"] = d;
    row["expansions"] = r.expansions;
    row["path_cost"] = r.path_cost;
    rows.push_back(row);
    tsv << d << "\t" << optional_text(m.in_sample.eps_ate) << "\t" << optional_text(m.out_sample.eps_ate)
        << "\t" << optional_text(m.in_sample.sqrt_eps_pehe) << "\t"
        << optional_text(m.out_sample.sqrt_eps_pehe) << "\t" << r.expansions << "\t" << r.path_cost
        << "\t" << m.name << "\n";
    text << "  depth " << d << ": " << m.name << " (eps_ate in " << optional_text(m.in_sample.eps_ate)
         << ", out " << optional_text(m.out_sample.eps_ate) << ", expansions " << r.expansions << ")\n";
  }
  json doc;
  doc["command"] = "depth_sweep";
  doc["seed"] = cfg.seed();
  doc["sweep"] = rows;
  doc["config"] = config_json(cfg);
  std::filesystem::create_directories(cfg.out_dir());
  write_file(cfg.out_dir() / "sweep.tsv", tsv.str());
  write_file(cfg.out_dir() / "report.json", doc.dump(2) + "\n");
  write_file(cfg.out_dir() / "report.txt", text.str());
  std::cout << text.str();
  return kExitOk;
}

int run_diagnose(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const Grammar grammar = grammar_for(cfg, p.ctx.input_dim);
  SynthConfig sc = cfg.synth_config();
  sc.max_depth = cfg.get_int("diagnose.max_depth");
  DiagnosticConfig diag;
  diag.samples = cfg.get_int("diagnose.samples");
  diag.seed = cfg.seed();
  if (cfg.get("diagnose.epsilon") == "auto") {
    const auto [lo, hi] = std::minmax_element(p.train.targets.begin(), p.train.targets.end());
    diag.epsilon = 0.05 * (*hi - *lo) * (*hi - *lo);
  } else {
    diag.epsilon = cfg.get_double("diagnose.epsilon");
  }
  const AdmissibilityReport rep = admissibility_diagnostic(grammar, p.train, p.valid, sc, diag, p.ctx);
  json doc;
  doc["command"] = "diagnose";
  doc["seed"] = cfg.seed();
  doc["fraction_admissible"] = rep.fraction_admissible;
  doc["epsilon"] = rep.epsilon;
  doc["epsilon_hat"] = {{"median", rep.epsilon_hat_median},
                        {"p90", rep.epsilon_hat_p90},
                        {"max", rep.epsilon_hat_max}};
  json samples = json::array();
  std::ostringstream text;
  text << "admissibility diagnostic: fraction_admissible=" << rep.fraction_admissible
       << " at epsilon=" << rep.epsilon << "\n";
  for (const auto& s : rep.samples) {
    samples.push_back({{"node", s.node},
                       {"h", s.h},
                       {"j_hat", s.j_hat},
                       {"completions", s.completions},
                       {"admissible", s.admissible}});
    text << "  " << (s.admissible ? "ok  " : "FAIL") << " h=" << s.h << " J=" << s.j_hat << "  "
         << s.node << "\n";
  }
  doc["samples"] = samples;
  doc["config"] = config_json(cfg);
  std::filesystem::create_directories(cfg.out_dir());
  write_file(cfg.out_dir() / "report.json", doc.dump(2) + "\n");
  write_file(cfg.out_dir() / "report.txt", text.str());
  std::cout << text.str();
  if (rep.fraction_admissible < 0.9) {
    std::cerr << "warning: fraction_admissible " << rep.fraction_admissible << " is below 0.9\n";
  }
  return kExitOk;
}

int run_gen_data(const RunConfig& cfg) {
  const ObservationalDataset data = load_dataset(cfg);
  std::filesystem::create_directories(cfg.out_dir());
  write_csv(data, cfg.out_dir() / "data.csv");
  std::cout << "wrote " << data.size() << " units to " << (cfg.out_dir() / "data.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
  explicit_[key] = true;
  if (key == "train.preset" && !value.empty()) {
    const auto it = presets().find(value);
    if (it == presets().end()) throw ConfigError("unknown train.preset '" + value + "'");
    if (!explicitly_set("final.batch_size")) values_["final.batch_size"] = std::to_string(it->second.first);
    if (!explicitly_set("final.epochs")) values_["final.epochs"] = std::to_string(it->second.second);
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

Command RunConfig::command() const {
  static const std::map<std::string, Command> kCommands = {
      {"synthesize", Command::kSynthesize}, {"baseline", Command::kBaseline},
      {"depth_sweep", Command::kDepthSweep}, {"diagnose", Command::kDiagnose},
      {"gen_data", Command::kGenData}};
  const auto it = kCommands.find(get("command"));
  if (it == kCommands.end()) throw ConfigError("unknown command '" + get("command") + "'");
  return it->second;
}

std::uint64_t RunConfig::seed() const {
  const std::string& text = get("seed");
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("'seed' must be a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::filesystem::path RunConfig::out_dir() const { return get("out"); }

int RunConfig::get_int(const std::string& key) const { return parse_int(key, get(key)); }

double RunConfig::get_double(const std::string& key) const {
  const std::string& text = get(key);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("'" + key + "' must be a number, got '" + text + "'");
  }
  return value;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& text = get(key);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("'" + key + "' must be true or false, got '" + text + "'");
}

TrainConfig RunConfig::train_config(const std::string& section) const {
  TrainConfig tc;
  tc.epochs = get_int(section + ".epochs");
  tc.batch_size = get_int(section + ".batch_size");
  tc.learning_rate = get_double(section + ".lr");
  tc.restarts = get_int(section + ".restarts");
  tc.head_width = get_int(section + ".head_width");
  tc.seed = seed();
  const std::string& opt = get(section + ".optimizer");
  if (opt == "adam") {
    tc.optimizer = Optimizer::kAdam;
  } else if (opt == "sgd") {
    tc.optimizer = Optimizer::kSgd;
  } else {
    throw ConfigError("'" + section + ".optimizer' must be adam or sgd, got '" + opt + "'");
  }
  const std::string& schedule = get(section + ".beta_schedule");
  if (schedule == "linear") {
    tc.beta_schedule.linear = true;
    tc.beta_schedule.start = get_double(section + ".beta_start");
    tc.beta_schedule.end = get_double(section + ".beta_end");
  } else if (schedule != "fixed") {
    throw ConfigError("'" + section + ".beta_schedule' must be fixed or linear");
  }
  tc.validate();
  return tc;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig sc;
  sc.max_depth = get_int("synth.max_depth");
  sc.max_expansions = get_int("synth.max_expansions");
  sc.heuristic = train_config("heuristic");
  sc.final = train_config("final");
  const std::string& h = get("synth.heuristic");
  if (h == "relaxation") {
    sc.heuristic_kind = HeuristicKind::kRelaxation;
  } else if (h == "zero") {
    sc.heuristic_kind = HeuristicKind::kZero;
  } else {
    throw ConfigError("'synth.heuristic' must be relaxation or zero, got '" + h + "'");
  }
  sc.threads = threads_from_env();
  sc.validate();
  return sc;
}

SplitSpec RunConfig::split_spec() const {
  SplitSpec s;
  s.train = get_double("split.train");
  s.valid = get_double("split.valid");
  s.test = get_double("split.test");
  s.seed = seed();
  return s;
}

CsvSchema RunConfig::csv_schema() const {
  CsvSchema schema;
  schema.t_col = get("data.t_col");
  schema.y_col = get("data.y_col");
  if (!get("data.y0_col").empty()) schema.y0_col = get("data.y0_col");
  if (!get("data.y1_col").empty()) schema.y1_col = get("data.y1_col");
  schema.feature_cols = split_list(get("data.features"));
  return schema;
}

ObservationalDataset load_dataset(const RunConfig& cfg) {
  const std::string& source = cfg.get("data.source");
  if (source == "csv") {
    if (cfg.get("data.csv").empty()) throw ConfigError("data.source=csv needs data.csv");
    return load_csv(cfg.get("data.csv"), cfg.csv_schema());
  }
  if (source != "generate") throw ConfigError("'data.source' must be generate or csv");
  const std::string& kind = cfg.get("gen.kind");
  const auto d = static_cast<std::size_t>(cfg.get_int("gen.d"));
  if (kind == "twins") {
    OutcomeSpec spec;
    spec.tau = cfg.get_double("gen.tau");
    spec.heterogeneous = cfg.get_bool("gen.heterogeneous");
    spec.outcome_noise = cfg.get_double("gen.outcome_noise");
    spec.selection_noise = cfg.get_double("gen.selection_noise");
    spec.selection_bound = cfg.get_double("gen.selection_bound");
    return gen_twins_style(static_cast<std::size_t>(cfg.get_int("gen.n")), d, cfg.seed(), spec);
  }
  if (kind == "jobs") {
    return gen_jobs_style(static_cast<std::size_t>(cfg.get_int("gen.n_rand")),
                          static_cast<std::size_t>(cfg.get_int("gen.n_obs")), d, cfg.seed());
  }
  throw ConfigError("'gen.kind' must be twins or jobs, got '" + kind + "'");
}

Grammar grammar_for(const RunConfig& cfg, int input_dim) {
  std::vector<SubsetRange> ranges;
  for (const auto& item : split_list(cfg.get("synth.ranges"))) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("'synth.ranges' entries look like a:b, got '" + item + "'");
    }
    ranges.push_back({parse_int("synth.ranges", item.substr(0, colon)),
                      parse_int("synth.ranges", item.substr(colon + 1))});
  }
  std::vector<AlgebraicTag> tags;
  for (const auto& item : split_list(cfg.get("synth.algebraic"))) {
    if (item == "add") {
      tags.push_back(AlgebraicTag::kAdd);
    } else if (item == "mul") {
      tags.push_back(AlgebraicTag::kMul);
    } else {
      throw ConfigError("'synth.algebraic' accepts add and mul, got '" + item + "'");
    }
  }
  return default_grammar(input_dim, ranges, tags);
}

void report(const std::filesystem::path& out, const RunConfig& cfg, const SynthResult* result,
            const std::vector<ModelMetrics>& metrics, const std::vector<ModelMetrics>& baselines) {
  std::filesystem::create_directories(out);
  json doc;
  std::ostringstream text;
  doc["command"] = cfg.get("command");
  doc["seed"] = cfg.seed();
  if (result != nullptr) {
    const ModelMetrics& m = metrics.at(0);
    doc.update(metrics_row(m));
    doc["path_cost"] = result->path_cost;
    doc["structural_cost"] = result->structural_cost;
    doc["valid_loss"] = result->valid_loss;
    doc["expansions"] = result->expansions;
    doc["enqueued"] = result->enqueued;
    text << "program:         " << m.name << "\n"
         << "path cost:       " << result->path_cost << " (structure " << result->structural_cost
         << " + validation loss " << result->valid_loss << ")\n"
         << "expansions:      " << result->expansions << "\n"
         << "eps_ATE:         in " << optional_text(m.in_sample.eps_ate) << ", out "
         << optional_text(m.out_sample.eps_ate) << "\n"
         << "sqrt(eps_PEHE):  in " << optional_text(m.in_sample.sqrt_eps_pehe) << ", out "
         << optional_text(m.out_sample.sqrt_eps_pehe) << "\n"
         << "eps_ATT:         in " << optional_text(m.in_sample.eps_att) << ", out "
         << optional_text(m.out_sample.eps_att) << "\n";
    write_file(out / "frontier.tsv", format_frontier_log(result->frontier_log));
  }
  json rows = json::array();
  if (!baselines.empty()) text << "baselines:\n";
  for (const auto& b : baselines) {
    json row = metrics_row(b);
    row["seed"] = cfg.seed();
    rows.push_back(row);
    text << "  " << b.name << ": eps_ATE in " << optional_text(b.in_sample.eps_ate) << ", out "
         << optional_text(b.out_sample.eps_ate) << "; sqrt(eps_PEHE) in "
         << optional_text(b.in_sample.sqrt_eps_pehe) << ", out " << optional_text(b.out_sample.sqrt_eps_pehe)
         << "; eps_ATT in " << optional_text(b.in_sample.eps_att) << ", out "
         << optional_text(b.out_sample.eps_att) << (b.in_sample.biased_in_sample ? " (in-sample biased)" : "")
         << "\n";
  }
  doc["baselines"] = rows;
  doc["config"] = config_json(cfg);
  text << "config:\n";
  for (const auto& [k, v] : cfg.values()) {
    if (k != "out") text << "  " << k << "=" << v << "\n";
  }
  write_file(out / "report.json", doc.dump(2) + "\n");
  write_file(out / "report.txt", text.str());
  std::cout << text.str();
}

int run(const RunConfig& cfg) {
  try {
    switch (cfg.command()) {
      case Command::kSynthesize:
        return run_synthesize(cfg);
      case Command::kBaseline:
        return run_baseline(cfg);
      case Command::kDepthSweep:
        return run_depth_sweep(cfg);
      case Command::kDiagnose:
        return run_diagnose(cfg);
      case Command::kGenData:
        return run_gen_data(cfg);
    }
  } catch (const BudgetError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kExitSearch;
  } catch (const TrainingError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kExitSearch;
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

int main(int argc, char** argv) {
  CLI::App app{"nester: synthesize treatment-effect programs"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value configuration file")->required();
  app.add_option("--seed", seed, "override the run seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--set", overrides, "extra key=value overrides (repeatable)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg = RunConfig::from_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (!out.empty()) cfg.set("out", out);
    return run(cfg);
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace nester::cli
