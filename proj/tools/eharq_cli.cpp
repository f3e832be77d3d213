// Command-line front end: dataset generation (gen), classifier fitting
// (train), test-set evaluation (eval), and scheduled-system analysis
// (system). Every subcommand reads one JSON config and writes its outputs
// into --out; relative paths inside a config resolve against the config
// file's directory. Exit codes: 0 success, 2 configuration error, 3 runtime
// failure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eharq/alist.hpp"
#include "eharq/dataset.hpp"
#include "eharq/ldpc.hpp"
#include "eharq/logistic.hpp"
#include "eharq/metrics.hpp"
#include "eharq/model_io.hpp"
#include "eharq/sae.hpp"
#include "eharq/scaler.hpp"
#include "eharq/system.hpp"
#include "eharq/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eharq;

namespace {

// Configuration problems (bad JSON, missing files/keys) exit with code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("missing file: " + path.string());
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::ifstream open_existing(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

fs::path resolve(const std::string& raw, const fs::path& base_dir) {
  const fs::path p(raw);
  return p.is_absolute() ? p : base_dir / p;
}

void write_json_file(const json& j, const fs::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failure: " + path.string());
}

// ---------------------------------------------------------------- gen -----

ParityCheckMatrix code_from_config(const json& cfg, const fs::path& config_dir) {
  const json& code = cfg.at("code");
  const std::string type = code.at("type").get<std::string>();
  if (type == "gallager") {
    return gallager_regular(code.at("n_vars").get<int>(), code.at("col_weight").get<int>(),
                            code.at("row_weight").get<int>(),
                            code.value("seed", std::uint64_t{1}));
  }
  if (type == "alist") {
    const fs::path path = resolve(code.at("path").get<std::string>(), config_dir);
    auto in = open_existing(path, "code file");
    return parse_alist(in);
  }
  throw ConfigError("code.type must be 'gallager' or 'alist'");
}

ChannelConfig channel_from_config(const json& cfg) {
  ChannelConfig ch;
  const json c = cfg.value("channel", json::object());
  ch.snr_db = c.value("snr_db", ch.snr_db);
  const std::string mod = c.value("modulation", std::string("qpsk"));
  if (mod == "bpsk") {
    ch.modulation = Modulation::kBpsk;
  } else if (mod == "qpsk") {
    ch.modulation = Modulation::kQpsk;
  } else {
    throw ConfigError("channel.modulation must be 'bpsk' or 'qpsk'");
  }
  const std::string fading = c.value("fading", std::string("none"));
  if (fading == "block_ar1") {
    ch.fading = FadingModel::kBlockAr1;
  } else if (fading != "none") {
    throw ConfigError("channel.fading must be 'none' or 'block_ar1'");
  }
  ch.fading_rho = c.value("fading_rho", ch.fading_rho);
  ch.seed = c.value("seed", ch.seed);
  return ch;
}

int run_gen(const fs::path& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_cli, std::optional<std::int64_t> n_cli) {
  const json cfg = load_json(config_path);
  const ParityCheckMatrix h = code_from_config(cfg, config_path.parent_path());
  ChannelConfig channel = channel_from_config(cfg);
  const std::uint64_t master = seed_cli ? *seed_cli : cfg.value("seed", std::uint64_t{1});

  json summary;
  summary["calibrated"] = false;
  if (cfg.contains("calibrate_bler")) {
    const double target = cfg.at("calibrate_bler").get<double>();
    const json cal_cfg = cfg.value("calibration", json::object());
    CalibrationConfig cal;
    cal.modulation = channel.modulation;
    cal.snr_lo_db = cal_cfg.value("snr_lo_db", cal.snr_lo_db);
    cal.snr_hi_db = cal_cfg.value("snr_hi_db", cal.snr_hi_db);
    cal.trials_per_point = cal_cfg.value("trials_per_point", cal.trials_per_point);
    cal.max_bisections = cal_cfg.value("max_bisections", cal.max_bisections);
    cal.full_decode_iters = cfg.value("full_decode_iters", cal.full_decode_iters);
    cal.seed = cal_cfg.value("seed", master);
    channel.snr_db = calibrate_snr(h, target, cal_cfg.value("rel_tol", 0.05), cal);
    summary["calibrated"] = true;
    summary["target_bler"] = target;
    std::cout << "calibrated snr_db = " << format_g17(channel.snr_db) << " for target bler "
              << format_g17(target) << '\n';
  }

  GenerationConfig base;
  base.channel = channel;
  base.subcode_fraction = cfg.value("subcode_fraction", base.subcode_fraction);
  base.vnr_iters = cfg.value("vnr_iters", base.vnr_iters);
  base.full_decode_iters = cfg.value("full_decode_iters", base.full_decode_iters);

  const json splits =
      cfg.value("splits", json{{"train", 20000}, {"val", 10000}, {"test", 20000}});
  // One fresh seed per split keeps the record/fading streams disjoint.
  Rng split_rng = substream(master, 0x73706c6974 /* "split" */, 0);

  fs::create_directories(out_dir);
  summary["seed"] = master;
  summary["snr_db"] = channel.snr_db;
  summary["code"] = {{"n_vars", h.n_vars()}, {"n_checks", h.n_checks()}};
  for (const char* split : {"train", "val", "test"}) {
    GenerationConfig g = base;
    g.seed = split_rng.next_u64();
    g.n_records = n_cli ? *n_cli : splits.value(split, std::int64_t{0});
    if (g.n_records <= 0) throw ConfigError(std::string("splits.") + split + " must be positive");
    const std::string file = std::string(split) + ".csv";
    auto out = open_output(out_dir / file);
    const GenerationSummary s = generate_dataset(g, h, out);
    summary["splits"][split] = {{"file", file},
                                {"seed", g.seed},
                                {"n_records", s.n_records},
                                {"n_errors", s.n_errors},
                                {"bler", s.bler},
                                {"bler_ci_lo", s.bler_ci.lo},
                                {"bler_ci_hi", s.bler_ci.hi}};
    std::cout << split << ": " << s.n_records << " records, " << s.n_errors
              << " errors, bler " << format_g17(s.bler) << " [" << format_g17(s.bler_ci.lo)
              << ", " << format_g17(s.bler_ci.hi) << "]\n";
  }
  write_json_file(summary, out_dir / "gen_summary.json");
  std::cout << "wrote " << (out_dir / "gen_summary.json").string() << '\n';
  return 0;
}

// -------------------------------------------------------------- train -----

// Which columns feed the model: optional history augmentation (windows plus
// the base columns it derives from) followed by the feature selection.
struct FeatureSpec {
  std::vector<int> windows;
  std::vector<std::string> base;  // empty = augmentation default (vnr_* + eucd)
  std::vector<std::string> features;
};

DataTable apply_spec(DataTable table, const FeatureSpec& spec) {
  if (!spec.windows.empty()) table = augment_with_history(table, spec.windows, spec.base);
  return table.select(spec.features);
}

DataTable load_table(const fs::path& path) {
  auto in = open_existing(path, "dataset");
  return read_data_table(in);
}

FeatureSpec feature_spec_from_config(const json& cfg, const DataTable& table,
                                     const std::string& model_type) {
  FeatureSpec spec;
  if (model_type == "ht0" || model_type == "ht5") {
    spec.features = {model_type == "ht0" ? "vnr_0" : "vnr_5"};
    return spec;
  }
  spec.windows = cfg.value("history_windows", std::vector<int>{});
  if (cfg.contains("features")) {
    spec.features = cfg.at("features").get<std::vector<std::string>>();
    if (spec.features.empty()) throw ConfigError("features must not be empty");
    return spec;
  }
  // Default: every vnr_* column, plus its history means when windows are set.
  for (const auto& name : table.columns)
    if (name.rfind("vnr_", 0) == 0) spec.features.push_back(name);
  if (spec.features.empty()) throw ConfigError("dataset has no vnr_* columns");
  spec.base = spec.features;
  for (int w : spec.windows)
    for (const auto& name : spec.base)
      spec.features.push_back("h" + std::to_string(w) + "_vnr" + name.substr(4));
  return spec;
}

std::size_t count_positives(const std::vector<int>& labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

int run_train(const fs::path& config_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed_cli, bool gradcheck) {
  const json cfg = load_json(config_path);
  const fs::path config_dir = config_path.parent_path();
  const std::string type = cfg.at("model").get<std::string>();
  if (type != "ht0" && type != "ht5" && type != "lr" && type != "sae")
    throw ConfigError("model must be one of ht0, ht5, lr, sae");
  if (gradcheck && type != "sae") throw ConfigError("--gradcheck applies to sae models only");
  const std::uint64_t master = seed_cli ? *seed_cli : cfg.value("seed", std::uint64_t{0});

  const DataTable raw = load_table(resolve(cfg.at("train_csv").get<std::string>(), config_dir));
  const FeatureSpec spec = feature_spec_from_config(cfg, raw, type);

  TrainedModel model;
  json log{{"type", type}};
  if (type == "ht0" || type == "ht5") {
    model = make_ht_model(type);
    raw.column_index(model.features.front());  // the threshold column must exist
    log["fitted"] = false;
  } else {
    const DataTable sel = apply_spec(raw, spec);
    if (sel.n_rows() < 2) throw std::runtime_error("training set has fewer than two usable rows");
    model.features = spec.features;
    model.scaled = true;
    model.scaler = fit_scaler(sel.rows);
    const auto x = apply_scaler(model.scaler, sel.rows);
    log["n_rows"] = sel.n_rows();
    log["n_pos"] = count_positives(sel.labels);
    if (!model.scaler.warnings.empty()) log["scaler_warnings"] = model.scaler.warnings;

    if (type == "lr") {
      const json lr_cfg = cfg.value("lr", json::object());
      const double lambda = lr_cfg.value("lambda", 1e-6);
      const double tolerance = lr_cfg.value("tolerance", 1e-8);
      const int max_iter = lr_cfg.value("max_iter", 200);
      model.type = "lr";
      model.lr = fit_logistic_regression(x, sel.labels, lambda, tolerance, max_iter);
      // fit_logistic_regression throws unless the gradient tolerance is met.
      log["converged"] = true;
      log["lambda"] = lambda;
      log["tolerance"] = tolerance;
      log["max_iter"] = max_iter;
      log["weights"] = model.lr.weights;
      log["bias"] = model.lr.bias;
      std::cout << "lr converged on " << sel.n_rows() << " rows (" << spec.features.size()
                << " features)\n";
    } else {
      const json sae_cfg = cfg.value("sae", json::object());
      SaeTrainConfig tc;
      tc.learning_rate = sae_cfg.value("learning_rate", tc.learning_rate);
      tc.epochs = sae_cfg.value("epochs", tc.epochs);
      tc.batch_size = sae_cfg.value("batch_size", tc.batch_size);
      tc.oversample_factor = sae_cfg.value("oversample_factor", tc.oversample_factor);
      tc.lambda_rec = sae_cfg.value("lambda_rec", tc.lambda_rec);
      tc.dropout = sae_cfg.value("dropout", tc.dropout);
      tc.patience = sae_cfg.value("patience", tc.patience);
      tc.seed = master;

      if (gradcheck) {
        const std::size_t m = std::min<std::size_t>(x.size(), 64);
        if (m < 2) throw std::runtime_error("gradient check needs at least two rows");
        Mat batch(static_cast<int>(m), static_cast<int>(x[0].size()));
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < x[r].size(); ++c)
            batch(static_cast<int>(r), static_cast<int>(c)) = x[r][c];
        SaeModel probe(static_cast<int>(x[0].size()), tc.dropout, tc.seed);
        const double err = gradient_check(
            probe, batch, std::span<const int>(sel.labels.data(), m), tc.lambda_rec);
        log["gradient_check_max_rel_err"] = err;
        std::cout << "gradient check max relative error = " << format_g17(err) << '\n';
      }

      std::optional<DataTable> val;
      std::vector<std::vector<double>> val_x;
      if (cfg.contains("val_csv")) {
        val = apply_spec(load_table(resolve(cfg.at("val_csv").get<std::string>(), config_dir)),
                         spec);
        val_x = apply_scaler(model.scaler, val->rows);
      }
      SaeTrainLog tlog;
      model.type = "sae";
      model.sae_dropout = tc.dropout;
      model.sae = std::make_shared<SaeModel>(
          fit_sae(x, sel.labels, tc, val ? &val_x : nullptr,
                  val ? std::span<const int>(val->labels) : std::span<const int>{}, &tlog));
      log["train_loss"] = tlog.train_loss;
      log["val_ce"] = tlog.val_ce;
      log["best_epoch"] = tlog.best_epoch;
      log["epochs_run"] = tlog.epochs_run;
      std::cout << "sae trained on " << sel.n_rows() << " rows (" << spec.features.size()
                << " features), " << tlog.epochs_run << " epochs, final loss "
                << format_g17(tlog.train_loss.back()) << '\n';
    }
  }

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "model.json");
    save_model(model, out);
  }
  write_json_file(log, out_dir / "train_log.json");
  std::cout << "wrote " << (out_dir / "model.json").string() << '\n';
  return 0;
}

// --------------------------------------------------------------- eval -----

// History columns are named h{w}_{base}; recover the windows a model needs.
std::optional<int> history_window(const std::string& name) {
  if (name.size() < 3 || name[0] != 'h' || !std::isdigit(static_cast<unsigned char>(name[1])))
    return std::nullopt;
  std::size_t i = 1;
  int w = 0;
  while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
    w = w * 10 + (name[i] - '0');
    ++i;
  }
  if (i >= name.size() || name[i] != '_') return std::nullopt;
  return w;
}

int run_eval(const fs::path& config_path, const fs::path& out_dir) {
  const json cfg = load_json(config_path);
  const fs::path config_dir = config_path.parent_path();
  TrainedModel model;
  {
    auto in = open_existing(resolve(cfg.at("model").get<std::string>(), config_dir), "model file");
    model = load_model(in);
  }
  DataTable table = load_table(resolve(cfg.at("test_csv").get<std::string>(), config_dir));
  std::set<int> windows;
  for (const auto& name : model.features)
    if (const auto w = history_window(name)) windows.insert(*w);
  if (!windows.empty())
    table = augment_with_history(table, std::vector<int>(windows.begin(), windows.end()));
  const DataTable sel = table.select(model.features);
  if (sel.n_rows() == 0) throw std::runtime_error("no usable rows in the test set");

  const std::vector<double> scores = model.score_rows(sel.rows);
  const CurveSet curve = pr_curve_and_auc(scores, sel.labels);

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "pr_curve.csv");
    write_curve_csv(curve, out);
  }
  {
    auto out = open_output(out_dir / "fnr_fpr_curve.csv");
    write_curve_csv(curve, out);
  }

  const std::size_t n_pos = count_positives(sel.labels);
  std::size_t low_confidence = 0;
  for (const auto& pt : curve.points) low_confidence += pt.low_confidence ? 1 : 0;
  json summary{{"model_type", model.type},
               {"auc_pr", curve.auc_pr},
               {"n_records", table.n_rows()},
               {"n_scored", sel.n_rows()},
               {"n_pos", n_pos},
               {"n_neg", sel.n_rows() - n_pos},
               {"n_points", curve.points.size()},
               {"low_confidence_points", low_confidence}};
  std::cout << "auc_pr = " << format_g17(curve.auc_pr) << " (" << n_pos << " positives, "
            << sel.n_rows() - n_pos << " negatives)\n";
  if (cfg.contains("fnr_target")) {
    const double target = cfg.at("fnr_target").get<double>();
    const ThresholdSelection choice = threshold_for_target_fnr(curve, target);
    const Interval ci = fnr_interval(choice.point);
    summary["operating_point"] = {{"fnr_target", target},
                                  {"threshold", choice.point.threshold},
                                  {"fnr", choice.point.fnr},
                                  {"fpr", choice.point.fpr},
                                  {"fn", choice.point.fn},
                                  {"fp", choice.point.fp},
                                  {"tp", choice.point.tp},
                                  {"tn", choice.point.tn},
                                  {"fnr_ci_lo", ci.lo},
                                  {"fnr_ci_hi", ci.hi},
                                  {"low_confidence", choice.point.low_confidence},
                                  {"target_unreachable", choice.target_unreachable}};
    std::cout << "operating point for fnr <= " << format_g17(target) << ": fnr "
              << format_g17(choice.point.fnr) << ", fpr " << format_g17(choice.point.fpr)
              << (choice.target_unreachable ? " (target unreachable)" : "") << '\n';
  }
  write_json_file(summary, out_dir / "eval_summary.json");
  std::cout << "wrote " << (out_dir / "eval_summary.json").string() << '\n';
  return 0;
}

// ------------------------------------------------------------- system -----

CurveSet read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("curve file: empty input");
  if (split_csv_line(line) !=
      std::vector<std::string>{"theta", "fn", "fp", "tp", "tn", "fnr", "fpr", "precision",
                               "recall"})
    throw std::runtime_error("curve file: unexpected header");
  CurveSet curve;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9)
      throw std::runtime_error("curve file line " + std::to_string(line_no) +
                               ": expected 9 fields");
    OperatingPoint pt;
    pt.threshold = parse_csv_double(f[0], line_no);
    pt.fn = parse_csv_int(f[1], line_no);
    pt.fp = parse_csv_int(f[2], line_no);
    pt.tp = parse_csv_int(f[3], line_no);
    pt.tn = parse_csv_int(f[4], line_no);
    pt.finish();
    curve.points.push_back(pt);
  }
  if (curve.points.empty()) throw std::runtime_error("curve file: no operating points");
  return curve;
}

// Candidate operating points for the packet-failure sweep: for each of
// `cap` log-spaced FNR budgets (plus the fallback budget), the largest
// threshold whose FNR stays within budget, deduplicated by (fnr, fpr).
std::vector<OperatingPoint> pick_operating_points(const CurveSet& curve, int cap,
                                                  double fnr_fallback) {
  const std::int64_t n_pos = curve.points.front().fn + curve.points.front().tp;
  const double lo = n_pos > 0 ? 0.5 / static_cast<double>(n_pos) : 1e-4;
  std::vector<double> targets{fnr_fallback};
  cap = std::max(cap, 2);
  for (int i = 0; i < cap; ++i)
    targets.push_back(lo * std::pow(1.0 / lo, static_cast<double>(i) / (cap - 1)));
  std::vector<OperatingPoint> chosen;
  for (double t : targets) chosen.push_back(threshold_for_target_fnr(curve, t).point);
  std::sort(chosen.begin(), chosen.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    return std::make_pair(a.fnr, a.fpr) < std::make_pair(b.fnr, b.fpr);
  });
  chosen.erase(std::unique(chosen.begin(), chosen.end(),
                           [](const OperatingPoint& a, const OperatingPoint& b) {
                             return a.fnr == b.fnr && a.fpr == b.fpr;
                           }),
               chosen.end());
  return chosen;
}

struct SchemeSpec {
  std::string name;
  bool regular = false;
  fs::path curve_path;
  std::optional<int> t_rtt, t_c, n_retx;
};

struct ResultRow {
  std::string scheme, scenario;
  double p_e = 0.0, fnr = 0.0, fpr = 0.0;
  double p_pf = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false, fallback_used = false, low_confidence = false;
  bool has_sim = false;
  SimulationResult sim;
};

std::string csv_field(double v) { return std::isfinite(v) ? format_g17(v) : std::string(); }

int run_system(const fs::path& config_path, const fs::path& out_dir,
               std::optional<std::uint64_t> seed_cli, bool simulate) {
  const json cfg = load_json(config_path);
  const fs::path config_dir = config_path.parent_path();

  SystemConfig base;
  const json& b = cfg.at("base");
  base.n_ue = b.at("n_ue").get<int>();
  base.p_arrival = b.at("p_arrival").get<double>();
  base.n_res = b.at("n_res").get<int>();
  base.t_c = b.value("t_c", base.t_c);
  base.t_rtt = b.value("t_rtt", base.t_rtt);
  base.n_retx = b.value("n_retx", base.n_retx);

  struct Scenario {
    std::string name;
    double p_e;
  };
  std::vector<Scenario> scenarios;
  for (const json& s : cfg.at("scenarios")) {
    Scenario sc{s.at("name").get<std::string>(), s.at("p_e").get<double>()};
    if (sc.name.find(',') != std::string::npos)
      throw ConfigError("scenario names must not contain commas");
    scenarios.push_back(std::move(sc));
  }
  if (scenarios.empty()) throw ConfigError("scenarios must not be empty");

  std::vector<SchemeSpec> schemes;
  for (const json& s : cfg.at("schemes")) {
    SchemeSpec spec;
    spec.name = s.at("name").get<std::string>();
    if (spec.name.find(',') != std::string::npos)
      throw ConfigError("scheme names must not contain commas");
    const std::string type = s.at("type").get<std::string>();
    if (type == "regular") {
      spec.regular = true;
    } else if (type == "curve") {
      spec.curve_path = resolve(s.at("curve").get<std::string>(), config_dir);
    } else {
      throw ConfigError("scheme type must be 'regular' or 'curve'");
    }
    if (s.contains("t_rtt")) spec.t_rtt = s.at("t_rtt").get<int>();
    if (s.contains("t_c")) spec.t_c = s.at("t_c").get<int>();
    if (s.contains("n_retx")) spec.n_retx = s.at("n_retx").get<int>();
    schemes.push_back(std::move(spec));
  }
  if (schemes.empty()) throw ConfigError("schemes must not be empty");

  const double fnr_eval = cfg.value("fnr_eval", 8e-4);
  const int max_points = cfg.value("max_curve_points", 25);
  const std::int64_t sim_slots = cfg.value("sim_slots", std::int64_t{200000});
  const std::uint64_t sim_seed = seed_cli ? *seed_cli : cfg.value("sim_seed", std::uint64_t{1});

  std::vector<ResultRow> rows;
  for (const SchemeSpec& scheme : schemes) {
    SystemConfig scheme_base = base;
    if (scheme.t_rtt) scheme_base.t_rtt = *scheme.t_rtt;
    if (scheme.t_c) scheme_base.t_c = *scheme.t_c;
    if (scheme.n_retx) scheme_base.n_retx = *scheme.n_retx;

    std::vector<OperatingPoint> candidates;
    OperatingPoint fallback;
    if (!scheme.regular) {
      auto in = open_existing(scheme.curve_path, "curve file");
      const CurveSet curve = read_curve_csv(in);
      candidates = pick_operating_points(curve, max_points, fnr_eval);
      fallback = threshold_for_target_fnr(curve, fnr_eval).point;
    }

    for (const Scenario& scenario : scenarios) {
      SystemConfig c = scheme_base;
      c.p_e = scenario.p_e;
      ResultRow row;
      row.scheme = scheme.name;
      row.scenario = scenario.name;
      row.p_e = scenario.p_e;
      if (scheme.regular) {
        c.fnr = 0.0;
        c.fpr = 0.0;
        const SystemAnalysis a = analyze_system(c);
        row.p_pf = a.p_pf;
        row.diverged = a.diverged;
      } else {
        CurveSet cand;
        cand.points = candidates;
        const SystemSweepResult sweep = fnr_sweep_system(c, cand);
        // Operate at the analytic optimum when its FNR estimate is backed by
        // enough positives; otherwise fall back to the fixed evaluation FNR.
        const SystemSweepRow* pick = nullptr;
        if (sweep.argmin) {
          const SystemSweepRow& best = sweep.rows[*sweep.argmin];
          const auto it = std::find_if(candidates.begin(), candidates.end(),
                                       [&](const OperatingPoint& p) {
                                         return p.fnr == best.fnr && p.fpr == best.fpr;
                                       });
          if (it != candidates.end() && !it->low_confidence) pick = &best;
        }
        if (pick == nullptr) {
          row.fallback_used = true;
          row.low_confidence = fallback.low_confidence;
          for (const SystemSweepRow& r : sweep.rows)
            if (r.fnr == fallback.fnr && r.fpr == fallback.fpr) pick = &r;
        }
        if (pick == nullptr) throw std::logic_error("system: fallback point missing from sweep");
        row.fnr = pick->fnr;
        row.fpr = pick->fpr;
        row.p_pf = pick->p_pf_analytic;
        row.diverged = pick->diverged;
      }
      if (simulate) {
        c.fnr = row.fnr;
        c.fpr = row.fpr;
        row.has_sim = true;
        row.sim = simulate_system(c, sim_slots, sim_seed);
      }
      rows.push_back(std::move(row));
    }
  }

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "system_results.csv");
    out << "scheme,scenario,p_e,fnr,fpr,p_pf_analytic,diverged,fallback_used,"
           "p_pf_sim,p_pf_sim_ci_lo,p_pf_sim_ci_hi\n";
    for (const ResultRow& r : rows) {
      out << r.scheme << ',' << r.scenario << ',' << format_g17(r.p_e) << ','
          << format_g17(r.fnr) << ',' << format_g17(r.fpr) << ',' << csv_field(r.p_pf) << ','
          << (r.diverged ? 1 : 0) << ',' << (r.fallback_used ? 1 : 0) << ',';
      if (r.has_sim)
        out << format_g17(r.sim.p_pf) << ',' << format_g17(r.sim.ci.lo) << ','
            << format_g17(r.sim.ci.hi);
      else
        out << ",,";
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failure: system_results.csv");
  }

  // Total score over the scenarios where every scheme has a positive finite
  // analytic failure probability; diverged entries stay in the table above.
  std::vector<std::string> scored;
  std::vector<std::vector<double>> matrix(schemes.size());
  for (std::size_t t = 0; t < scenarios.size(); ++t) {
    bool ok = true;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      const double v = rows[s * scenarios.size() + t].p_pf;
      if (!std::isfinite(v) || v <= 0.0) ok = false;
    }
    if (!ok) continue;
    scored.push_back(scenarios[t].name);
    for (std::size_t s = 0; s < schemes.size(); ++s)
      matrix[s].push_back(rows[s * scenarios.size() + t].p_pf);
  }
  std::vector<double> scores;
  if (!scored.empty()) scores = total_score(matrix);

  json summary{{"fnr_eval", fnr_eval}, {"simulate", simulate}};
  summary["scenarios"] = json::array();
  for (const Scenario& s : scenarios)
    summary["scenarios"].push_back({{"name", s.name}, {"p_e", s.p_e}});
  summary["schemes"] = json::array();
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    json scheme{{"name", schemes[s].name},
                {"type", schemes[s].regular ? "regular" : "curve"}};
    scheme["rows"] = json::array();
    for (std::size_t t = 0; t < scenarios.size(); ++t) {
      const ResultRow& r = rows[s * scenarios.size() + t];
      json row{{"scenario", r.scenario}, {"fnr", r.fnr},
               {"fpr", r.fpr},           {"diverged", r.diverged},
               {"fallback_used", r.fallback_used}};
      if (std::isfinite(r.p_pf)) row["p_pf_analytic"] = r.p_pf;
      if (r.has_sim)
        row["sim"] = {{"p_pf", r.sim.p_pf},
                      {"ci_lo", r.sim.ci.lo},
                      {"ci_hi", r.sim.ci.hi},
                      {"packets", r.sim.packets},
                      {"failures", r.sim.failures}};
      scheme["rows"].push_back(std::move(row));
    }
    if (!scores.empty()) scheme["total_score"] = scores[s];
    summary["schemes"].push_back(std::move(scheme));
  }
  summary["scored_scenarios"] = scored;
  write_json_file(summary, out_dir / "system_summary.json");

  std::cout << "p_pf (analytic), scheme x scenario\n";
  std::cout << "scheme";
  for (const Scenario& s : scenarios) std::cout << ',' << s.name;
  std::cout << '\n';
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    std::cout << schemes[s].name;
    for (std::size_t t = 0; t < scenarios.size(); ++t) {
      const ResultRow& r = rows[s * scenarios.size() + t];
      std::cout << ',' << (r.diverged ? "diverged" : csv_field(r.p_pf));
    }
    std::cout << '\n';
  }
  if (!scores.empty()) {
    std::cout << "total score over " << scored.size() << " scenario(s):\n";
    char buf[64];
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      std::snprintf(buf, sizeof(buf), "%.4f", scores[s]);
      std::cout << schemes[s].name << ' ' << buf << '\n';
    }
  } else {
    std::cout << "total score skipped: no scenario has finite results for every scheme\n";
  }
  std::cout << "wrote " << (out_dir / "system_summary.json").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDPC subcode feature pipeline and scheduled-system evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::int64_t n_override = 0;
  bool simulate = false;
  bool gradcheck = false;

  CLI::App* gen = app.add_subcommand("gen", "generate train/val/test feature datasets");
  CLI::App* train = app.add_subcommand("train", "fit a decodability classifier");
  CLI::App* eval = app.add_subcommand("eval", "score a test split and export curves");
  CLI::App* system = app.add_subcommand("system", "packet failure rates per scheme and scenario");
  for (CLI::App* sub : {gen, train, eval, system}) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: .)");
    sub->add_option("--seed", seed, "override the config's master seed");
  }
  gen->add_option("--n", n_override, "records per split, overriding the config");
  train->add_flag("--gradcheck", gradcheck, "finite-difference gradient check before training");
  system->add_flag("--simulate", simulate, "add Monte Carlo confidence intervals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::optional<std::uint64_t> seed_opt;
  if (sub->count("--seed") > 0) seed_opt = seed;
  std::optional<std::int64_t> n_opt;
  if (sub == gen && gen->count("--n") > 0) n_opt = n_override;

  try {
    if (sub == gen) return run_gen(config_path, out_dir, seed_opt, n_opt);
    if (sub == train) return run_train(config_path, out_dir, seed_opt, gradcheck);
    if (sub == eval) return run_eval(config_path, out_dir);
    return run_system(config_path, out_dir, seed_opt, simulate);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
