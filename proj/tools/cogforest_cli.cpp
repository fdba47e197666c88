#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cogforest/density.hpp"
#include "cogforest/distance.hpp"
#include "cogforest/feature_io.hpp"
#include "cogforest/forest.hpp"
#include "cogforest/model.hpp"
#include "cogforest/noise.hpp"
#include "cogforest/sampler.hpp"
#include "cogforest/synthetic.hpp"
#include "cogforest/train.hpp"

namespace fs = std::filesystem;
using namespace cogforest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Empty path or "-" means standard output.
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::vector<CLForest> load_forests(const std::vector<std::string>& paths) {
  std::vector<CLForest> out;
  for (const auto& p : paths) {
    try {
      out.push_back(forest_from_json(read_text(p)));
    } catch (const InputError& e) {
      throw InputError(p + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const CLForest& a, const CLForest& b) { return a.class_label() < b.class_label(); });
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (out[k].class_label() == out[k - 1].class_label()) {
      throw InputError("two forests for class " + std::to_string(out[k].class_label()));
    }
  }
  return out;
}

// Every forest sample must sit at the same row, with the same id, in x.
void check_ids(const FeatureMatrix& x, const std::vector<CLForest>& forests) {
  for (const auto& f : forests) {
    for (std::size_t k = 0; k < f.samples().size(); ++k) {
      const std::size_t row = f.samples()[k];
      if (row >= x.size() || x.id(row) != f.sample_ids()[k]) {
        throw InputError("forest/feature id mismatch: forest of class " + std::to_string(f.class_label()) +
                         " has sample '" + f.sample_ids()[k] + "' at row " + std::to_string(row) +
                         (row < x.size() ? ", features have '" + x.id(row) + "'" : ", beyond the feature file"));
      }
      if (x.has_labels() && x.label(row) != f.class_label()) {
        throw InputError("sample '" + x.id(row) + "' is labelled " + std::to_string(x.label(row)) +
                         " but appears in the forest of class " + std::to_string(f.class_label()));
      }
    }
  }
}

// Reconstructs a zero-feature matrix whose rows and ids come from the forests.
FeatureMatrix matrix_from_forests(const std::vector<CLForest>& forests) {
  std::size_t n = 0;
  for (const auto& f : forests) n += f.size();
  std::vector<std::string> ids(n);
  std::vector<int> labels(n, kNoLabel);
  for (const auto& f : forests) {
    for (std::size_t k = 0; k < f.samples().size(); ++k) {
      const std::size_t row = f.samples()[k];
      if (row >= n || labels[row] != kNoLabel) {
        throw InputError("forest sample rows do not form 0..N-1; pass --features to supply the full matrix");
      }
      ids[row] = f.sample_ids()[k];
      labels[row] = f.class_label();
    }
  }
  return FeatureMatrix(std::move(ids), Matrix::Zero(static_cast<Eigen::Index>(n), 1), std::move(labels));
}

// First CSV column of every line after the header.
std::vector<std::string> read_id_column(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::string> ids;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    ids.push_back(line.substr(0, line.find(',')));
  }
  return ids;
}

// Row -> id over every row any forest touches; rows no forest covers stay empty.
std::vector<std::string> ids_by_row(const std::vector<CLForest>& forests) {
  std::vector<std::string> ids;
  for (const auto& f : forests) {
    for (std::size_t k = 0; k < f.samples().size(); ++k) {
      const std::size_t row = f.samples()[k];
      if (row >= ids.size()) ids.resize(row + 1);
      ids[row] = f.sample_ids()[k];
    }
  }
  return ids;
}

// Ids outside the given forests are skipped, so one noise.csv serves every class.
std::vector<bool> exclusion_mask(const std::vector<std::string>& ids, const std::string& path) {
  std::vector<bool> mask(ids.size(), false);
  if (path.empty()) return mask;
  for (const auto& id : read_id_column(path)) {
    const auto it = id.empty() ? ids.end() : std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) continue;
    mask[static_cast<std::size_t>(it - ids.begin())] = true;
  }
  return mask;
}

std::vector<EnvParams> parse_envs(const std::string& text) {
  std::vector<EnvParams> out;
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw InputError("environment '" + pair + "' must be q_cls:q_attr");
    try {
      std::size_t used = 0;
      EnvParams e{std::stod(pair.substr(0, colon), &used), 0.0};
      const std::string rest = pair.substr(colon + 1);
      e.q_attr = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(rest);
      e.validate();
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw InputError("environment '" + pair + "' is not a pair of numbers");
    }
  }
  if (out.empty()) throw InputError("at least one environment is required");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw InputError("class size '" + item + "' is not a positive integer");
    }
  }
  return out;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
  std::string features;
  double d_rd = 0.0;
  double d_rn = 0.0;
  bool base_multiples = false;
  std::string metric = "euclidean";
  std::string leader_radius = "d_rd";
  std::string out_dir = ".";
};

void add_build(CLI::App& app, BuildArgs& a) {
  auto* c = app.add_subcommand("build", "Build one coarse-grained leading forest per class");
  c->add_option("features", a.features, "Feature file (.csv or CGF1 binary)")->required();
  c->add_option("--d-rd", a.d_rd, "Density radius")->required();
  c->add_option("--d-rn", a.d_rn, "Coarse-node radius")->required();
  c->add_flag("--base-multiples", a.base_multiples, "Read --d-rd/--d-rn as multiples of the base distance");
  c->add_option("--metric", a.metric, "euclidean | cosine-distance | manhattan")->capture_default_str();
  c->add_option("--leader-radius", a.leader_radius, "Leader search radius: d_rd | d_rn")->capture_default_str();
  c->add_option("--out-dir", a.out_dir, "Directory for forest_<class>.json")->capture_default_str();
}

int run_build(const BuildArgs& a) {
  const ClfParams params{a.base_multiples ? Radius::multiple(a.d_rd) : Radius::absolute(a.d_rd),
                         a.base_multiples ? Radius::multiple(a.d_rn) : Radius::absolute(a.d_rn)};
  params.validate();
  const BuildOptions opts{parse_metric(a.metric), parse_leader_radius(a.leader_radius)};
  const auto x = read_features(a.features);
  const auto dir = ensure_dir(a.out_dir);
  const auto forests = build_forests(x, params, opts);

  nlohmann::ordered_json summary;
  summary["classes"] = nlohmann::ordered_json::array();
  for (const auto& f : forests) {
    const std::string name = "forest_" + std::to_string(f.class_label()) + ".json";
    write_text((dir / name).string(), forest_to_json(f));
    auto entry = nlohmann::ordered_json::parse(stats_to_json(forest_stats(f)));
    nlohmann::ordered_json row;
    row["class"] = f.class_label();
    row["file"] = name;
    row["d_rd"] = f.params().d_rd;
    row["d_rn"] = f.params().d_rn;
    for (auto it = entry.begin(); it != entry.end(); ++it) row[it.key()] = it.value();
    summary["classes"].push_back(std::move(row));
  }
  write_text("-", summary.dump(-1, ' ', false) + "\n");
  return kExitOk;
}

// -------------------------------------------------------------- weights

struct WeightsArgs {
  std::vector<std::string> forests;
  double q_attr = 1.0;
  std::optional<double> q_cls;
  std::string exclude;
  std::string features;
  bool raw = false;
  bool json = false;
  std::string out;
};

void add_weights(CLI::App& app, WeightsArgs& a) {
  auto* c = app.add_subcommand("weights", "Attribute-wise (and optionally class-wise) sampling weights");
  c->add_option("forests", a.forests, "Forest JSON files")->required();
  c->add_option("--q-attr", a.q_attr, "Attribute balance factor in [0,1]")->capture_default_str();
  c->add_option("--q-cls", a.q_cls, "Class balance factor in [0,1]; emits global environment weights");
  c->add_option("--exclude", a.exclude, "CSV whose first column lists excluded ids (e.g. noise.csv); unknown ids are ignored");
  c->add_option("--features", a.features, "Feature file to check forest ids against");
  c->add_flag("--raw", a.raw, "Single forest only: pre-normalization weights");
  c->add_flag("--json", a.json, "Emit JSON instead of CSV");
  c->add_option("--out", a.out, "Output file (default: standard output)");
}

int run_weights(const WeightsArgs& a) {
  const auto forests = load_forests(a.forests);
  std::optional<FeatureMatrix> x;
  if (!a.features.empty()) {
    x = read_features(a.features);
    check_ids(*x, forests);
  }

  if (a.q_cls) {
    if (a.raw) throw InputError("--raw applies to class-local weights only (omit --q-cls)");
    const EnvParams env{*a.q_cls, a.q_attr};
    env.validate();
    if (!x) x = matrix_from_forests(forests);
    const auto excluded = exclusion_mask(x->ids(), a.exclude);
    const auto e = build_environment(*x, forests, env, excluded);
    write_text(a.out, a.json ? environment_to_json(e, x->ids()) + "\n" : environment_to_csv(e, x->ids()));
    return kExitOk;
  }
  if (forests.size() != 1) throw InputError("without --q-cls exactly one forest file is expected");
  EnvParams{1.0, a.q_attr}.validate();
  const auto ids = x ? x->ids() : ids_by_row(forests);
  const auto excluded = exclusion_mask(ids, a.exclude);
  const auto w = attribute_weights(forests[0], a.q_attr, excluded, !a.raw);
  write_text(a.out, a.json ? weights_to_json(w, ids) + "\n" : weights_to_csv(w, ids));
  return kExitOk;
}

// ---------------------------------------------------------------- noise

struct NoiseArgs {
  std::vector<std::string> forests;
  std::string features;
  NoiseParams params;
  std::string out;
};

void add_noise(CLI::App& app, NoiseArgs& a) {
  auto* c = app.add_subcommand("noise", "Flag likely label noise from forests and features");
  c->add_option("forests", a.forests, "Forest JSON files")->required();
  c->add_option("--features", a.features, "Feature file the forests were built from")->required();
  c->add_option("--n-min", a.params.n_min, "Trees smaller than this are flagged")->capture_default_str();
  c->add_option("--n-d", a.params.n_d, "Minimum node depth for the layer rule")->capture_default_str();
  c->add_option("--n-l", a.params.n_l, "Bottom layers per tree for the layer rule")->capture_default_str();
  c->add_option("--p-d", a.params.p_d, "Density percentile cap in [0,1]")->capture_default_str();
  c->add_option("--out", a.out, "Output CSV (default: standard output)");
}

int run_noise(const NoiseArgs& a) {
  a.params.validate();
  const auto forests = load_forests(a.forests);
  const auto x = read_features(a.features);
  check_ids(x, forests);
  NoiseReport all;
  for (const auto& f : forests) all.merge(select_noise(f, class_density(x.features(), f), a.params));
  write_text(a.out, noise_to_csv(all, x.ids()));
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string features;
  std::string heldout;
  bool plus = false;
  std::string loss;
  std::size_t warmup = 2;
  std::size_t epochs = 20;
  std::size_t refresh = 1;
  std::string envs = "1:1,0:0";
  double alpha = 0.5;
  double lr = 0.05;
  std::size_t batch = 32;
  std::uint64_t seed = 7;
  double margin = 0.0;
  NoiseParams noise;
  double d_rd = 3.0;
  double d_rn = 1.0;
  bool absolute_radii = false;
  std::string metric = "euclidean";
  std::string leader_radius = "d_rd";
  std::size_t feature_dim = 4;
  std::string out_dir = ".";
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Run the environment-resampling training loop on a linear toy model");
  c->add_option("features", a.features, "Labelled training features")->required();
  c->add_option("--heldout", a.heldout, "Labelled held-out features for balanced accuracy");
  c->add_flag("--plus", a.plus, "Select noise after every rebuild and exclude it (defaults to mctl)");
  c->add_option("--loss", a.loss, "mcl | mctl (default: mcl, or mctl with --plus)");
  c->add_option("--warmup", a.warmup, "Warm-up epochs on cross-entropy only")->capture_default_str();
  c->add_option("--epochs", a.epochs, "Training epochs after warm-up")->capture_default_str();
  c->add_option("--refresh", a.refresh, "Epochs between forest rebuilds")->capture_default_str();
  c->add_option("--envs", a.envs, "Environments as q_cls:q_attr pairs, comma separated")->capture_default_str();
  c->add_option("--alpha", a.alpha, "Weight of the feature-learning term")->capture_default_str();
  c->add_option("--lr", a.lr, "SGD learning rate")->capture_default_str();
  c->add_option("--batch", a.batch, "Batch size")->capture_default_str();
  c->add_option("--seed", a.seed, "Seed for initialization and sampling")->capture_default_str();
  c->add_option("--margin", a.margin, "Triplet hinge margin")->capture_default_str();
  c->add_option("--n-min", a.noise.n_min, "Noise: trees smaller than this are flagged")->capture_default_str();
  c->add_option("--n-d", a.noise.n_d, "Noise: minimum node depth for the layer rule")->capture_default_str();
  c->add_option("--n-l", a.noise.n_l, "Noise: bottom layers per tree")->capture_default_str();
  c->add_option("--p-d", a.noise.p_d, "Noise: density percentile cap")->capture_default_str();
  c->add_option("--d-rd", a.d_rd, "Density radius (multiple of base distance)")->capture_default_str();
  c->add_option("--d-rn", a.d_rn, "Coarse-node radius (multiple of base distance)")->capture_default_str();
  c->add_flag("--absolute-radii", a.absolute_radii, "Read --d-rd/--d-rn as absolute radii");
  c->add_option("--metric", a.metric, "euclidean | cosine-distance | manhattan")->capture_default_str();
  c->add_option("--leader-radius", a.leader_radius, "Leader search radius: d_rd | d_rn")->capture_default_str();
  c->add_option("--feature-dim", a.feature_dim, "Output width of the linear extractor")->capture_default_str();
  c->add_option("--out-dir", a.out_dir, "Directory for model.json, history.jsonl, noise.csv")->capture_default_str();
}

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.warmup_epochs = a.warmup;
  cfg.epochs = a.epochs;
  cfg.refresh_period = a.refresh;
  cfg.environments = parse_envs(a.envs);
  cfg.alpha = a.alpha;
  cfg.learning_rate = a.lr;
  cfg.batch_size = a.batch;
  cfg.seed = a.seed;
  cfg.margin = a.margin;
  if (!a.loss.empty()) cfg.loss = parse_loss_kind(a.loss);
  if (a.plus) cfg.noise = a.noise;
  cfg.clf = ClfParams{a.absolute_radii ? Radius::absolute(a.d_rd) : Radius::multiple(a.d_rd),
                      a.absolute_radii ? Radius::absolute(a.d_rn) : Radius::multiple(a.d_rn)};
  cfg.build = BuildOptions{parse_metric(a.metric), parse_leader_radius(a.leader_radius)};
  if (a.feature_dim < 1) throw InputError("--feature-dim must be >= 1");
  cfg.validate();
  a.noise.validate();

  const auto train = read_features(a.features);
  if (!train.has_labels()) throw InputError("training features need labels");
  std::optional<FeatureMatrix> heldout;
  if (!a.heldout.empty()) {
    heldout = read_features(a.heldout);
    if (!heldout->has_labels()) throw InputError("held-out features need labels");
    if (heldout->dim() != train.dim()) throw InputError("held-out width differs from training width");
  }
  const auto dir = ensure_dir(a.out_dir);

  const auto classes = train.classes();
  const auto class_count = static_cast<std::size_t>(classes.back() + 1);
  auto extractor = make_toy_extractor(train.dim(), a.feature_dim, a.seed);
  auto classifier = LinearClassifier::random(a.feature_dim, class_count, a.seed + 1);
  const FeatureMatrix* held = heldout ? &*heldout : nullptr;
  const auto result = a.plus ? run_cognisance_plus(train, held, extractor, classifier, cfg)
                             : run_cognisance(train, held, extractor, classifier, cfg);

  write_text((dir / "model.json").string(), model_to_json(extractor, classifier) + "\n");
  write_text((dir / "history.jsonl").string(), result.history.to_jsonl());
  write_text((dir / "noise.csv").string(), noise_to_csv(result.noise, train.ids()));

  const auto& last = result.history.records.back();
  nlohmann::ordered_json summary;
  summary["epochs"] = result.history.records.size();
  summary["summed_total"] = last.summed_total;
  summary["summed_ifl"] = last.summed_ifl;
  summary["flagged_noise"] = last.flagged_noise;
  summary["balanced_accuracy"] = last.balanced_accuracy ? nlohmann::ordered_json(*last.balanced_accuracy) : nullptr;
  write_text("-", summary.dump() + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SyntheticConfig cfg;
  std::string class_sizes = "400,100";
  std::string format = "csv";
  std::string out_dir = ".";
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Write a seeded two-class, two-attribute toy dataset");
  c->add_option("--seed", a.cfg.seed, "Generator seed")->capture_default_str();
  c->add_option("--class-sizes", a.class_sizes, "Training samples per class, comma separated")->capture_default_str();
  c->add_option("--majority", a.cfg.majority_fraction, "Share of the majority attribute")->capture_default_str();
  c->add_option("--input-dim", a.cfg.input_dim, "Input width (>= 2)")->capture_default_str();
  c->add_option("--spread", a.cfg.spread, "Blob standard deviation")->capture_default_str();
  c->add_option("--noise", a.cfg.noise_fraction, "Share of training rows replaced by far-off noise")->capture_default_str();
  c->add_option("--noise-radius-min", a.cfg.noise_radius_min, "Inner radius of planted noise")->capture_default_str();
  c->add_option("--noise-radius-max", a.cfg.noise_radius_max, "Outer radius of planted noise")->capture_default_str();
  c->add_option("--heldout-per-cell", a.cfg.heldout_per_cell, "Held-out rows per class and attribute")
      ->capture_default_str();
  c->add_option("--format", a.format, "csv | cgf")->capture_default_str();
  c->add_option("--out-dir", a.out_dir, "Directory for train, heldout and truth files")->capture_default_str();
}

int run_synth(SynthArgs a) {
  a.cfg.class_sizes = parse_sizes(a.class_sizes);
  if (a.format != "csv" && a.format != "cgf") throw InputError("--format must be csv or cgf");
  const auto data = make_synthetic(a.cfg);
  const auto dir = ensure_dir(a.out_dir);
  write_features(dir / ("train." + a.format), data.train);
  write_features(dir / ("heldout." + a.format), data.heldout);
  write_text((dir / "truth.csv").string(), truth_to_csv(data));
  return kExitOk;
}

// ------------------------------------------------------------ config file

// Expands `--config FILE` into `--key value` tokens placed before the
// explicit arguments of the subcommand, so explicit flags win.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::vector<std::string> explicit_args;
  std::string config;
  for (std::size_t k = 2; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw InputError("--config needs a file");
      config = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config = args[k].substr(9);
    } else {
      explicit_args.push_back(args[k]);
    }
  }
  if (config.empty()) return args;

  std::vector<std::string> out{args[0], args[1]};
  std::istringstream in(read_text(config));
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(config + " line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || opt->get_positional()) {
      throw InputError(config + " line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") {
        out.push_back("--" + key);
      } else if (value != "false" && value != "0") {
        throw InputError(config + " line " + std::to_string(line_no) + ": '" + key + "' expects true or false");
      }
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  out.insert(out.end(), explicit_args.begin(), explicit_args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogforest: coarse-grained leading forests, attribute-balanced sampling and noise selection"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "cogforest 0.1.0");

  BuildArgs build;
  WeightsArgs weights;
  NoiseArgs noise;
  TrainArgs train;
  SynthArgs synth;
  add_build(app, build);
  add_weights(app, weights);
  add_noise(app, noise);
  add_train(app, train);
  add_synth(app, synth);
  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config", "Flat key = value file; keys are flag names, explicit flags override it");
  }

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(app, std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "build") return run_build(build);
    if (cmd == "weights") return run_weights(weights);
    if (cmd == "noise") return run_noise(noise);
    if (cmd == "train") return run_train(train);
    if (cmd == "synth") return run_synth(synth);
    return kExitInternal;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
