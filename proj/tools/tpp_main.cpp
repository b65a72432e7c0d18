// Command-line front end: simulate / train / eval / filters / baseline /
// psd / crossval / repro. Physics parameters live in a strict JSON config;
// flags cover paths, seeds, and method switches. Errors print a
// machine-readable JSON object on stderr and exit nonzero.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpp/repro.hpp"
#include "tpp/tpp.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct SimConfig {
  tpp::CavityConfig cavity;
  tpp::NoiseSpec noise;
  std::vector<std::string> classes;
  int n_shots = 0;
  std::uint64_t seed = 7;
};

void require_exact_keys(const json& j, const std::vector<std::string>& required,
                        const std::vector<std::string>& optional,
                        const std::string& what) {
  for (const auto& k : required)
    if (!j.contains(k))
      throw tpp::ConfigError(what + ": missing key '" + k + "'");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    bool known = false;
    for (const auto& r : required) known = known || r == k;
    for (const auto& o : optional) known = known || o == k;
    if (!known) throw tpp::ConfigError(what + ": unknown key '" + k + "'");
  }
}

SimConfig parse_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tpp::ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw tpp::ConfigError("config parse error: " + std::string(e.what()));
  }
  require_exact_keys(j,
                     {"kappa", "eta", "t_on", "t_off", "t_meas", "dt", "chi",
                      "classes", "n_shots", "noise"},
                     {"delta_da", "seed"}, "config");
  SimConfig cfg;
  try {
    cfg.cavity.kappa = j.at("kappa").get<double>();
    cfg.cavity.delta_da = j.value("delta_da", 0.0);
    cfg.cavity.eta = j.at("eta").get<double>();
    cfg.cavity.t_on = j.at("t_on").get<double>();
    cfg.cavity.t_off = j.at("t_off").get<double>();
    cfg.cavity.t_meas = j.at("t_meas").get<double>();
    cfg.cavity.dt = j.at("dt").get<double>();
    for (const auto& [name, shift] : j.at("chi").items())
      cfg.cavity.chi.emplace_back(name, shift.get<double>());
    cfg.classes = j.at("classes").get<std::vector<std::string>>();
    cfg.n_shots = j.at("n_shots").get<int>();
    cfg.seed = j.value("seed", std::uint64_t{7});

    const json& n = j.at("noise");
    if (!n.contains("model")) throw tpp::ConfigError("noise: missing key 'model'");
    cfg.noise.model = tpp::noise_model_from_name(n.at("model").get<std::string>());
    switch (cfg.noise.model) {
      case tpp::NoiseModel::White:
        require_exact_keys(n, {"model"}, {}, "noise");
        break;
      case tpp::NoiseModel::IqVariances:
        require_exact_keys(n, {"model", "sigma_i2", "sigma_q2"}, {}, "noise");
        cfg.noise.sigma_i2 = n.at("sigma_i2").get<double>();
        cfg.noise.sigma_q2 = n.at("sigma_q2").get<double>();
        break;
      case tpp::NoiseModel::Amplifier:
        require_exact_keys(n, {"model", "gain_tr", "gamma_over_kappa", "n_cl"},
                           {}, "noise");
        cfg.noise.gain_tr = n.at("gain_tr").get<double>();
        cfg.noise.gamma_over_kappa = n.at("gamma_over_kappa").get<double>();
        cfg.noise.n_cl = n.at("n_cl").get<double>();
        break;
      case tpp::NoiseModel::Jumps: {
        require_exact_keys(n, {"model", "transitions"}, {}, "noise");
        for (const auto& t : n.at("transitions")) {
          require_exact_keys(t, {"from", "to", "rate"}, {}, "transition");
          cfg.noise.transitions.push_back({t.at("from").get<std::string>(),
                                           t.at("to").get<std::string>(),
                                           t.at("rate").get<double>()});
        }
        break;
      }
      case tpp::NoiseModel::PinkMix:
        require_exact_keys(n, {"model", "sigma_w", "sigma_p"}, {}, "noise");
        cfg.noise.sigma_w = n.at("sigma_w").get<double>();
        cfg.noise.sigma_p = n.at("sigma_p").get<double>();
        break;
    }
  } catch (const json::exception& e) {
    throw tpp::ConfigError("config field error: " + std::string(e.what()));
  }
  return cfg;
}

ordered_json report_to_json(const tpp::EvalReport& rep,
                            const std::vector<std::string>& classes) {
  ordered_json j;
  j["classes"] = classes;
  std::vector<std::vector<int>> confusion(rep.confusion.rows());
  for (Eigen::Index r = 0; r < rep.confusion.rows(); ++r)
    confusion[r].assign(rep.confusion.row(r).begin(), rep.confusion.row(r).end());
  j["confusion"] = confusion;
  j["fidelity"] = rep.fidelity;
  j["pooled_fidelity"] = rep.pooled_fidelity;
  j["infidelity"] = rep.infidelity;
  j["binomial_se"] = rep.binomial_se;
  j["n_eval"] = rep.n_eval;
  return j;
}

std::vector<int> classify_dataset(const tpp::TrainedTpp& model,
                                  const std::string& rule,
                                  const tpp::LabeledDataset& calib,
                                  const tpp::LabeledDataset& eval_set) {
  if (rule == "argmax") {
    std::vector<int> labels;
    for (int c = 0; c < eval_set.n_classes(); ++c)
      for (const auto& rec : eval_set.shots[c])
        labels.push_back(tpp::classify_argmax(model, rec));
    return labels;
  }
  if (rule == "gaussian")
    return tpp::repro::gaussian_rule_labels(model, calib, eval_set);
  throw tpp::ConfigError("unknown rule '" + rule + "' (use argmax|gaussian)");
}

// pipeline spec: tpp | tpp-argmax | fgda:matched[:a,b] | fgda:boxcar |
// multi-fgda:p,q
tpp::PipelineTrainer make_pipeline(const std::string& spec, double lambda,
                                   const std::optional<tpp::CavityConfig>& cavity,
                                   std::uint64_t seed) {
  auto split_pair = [](const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
      throw tpp::ConfigError("expected 'a,b' in pipeline spec, got '" + s + "'");
    return std::make_pair(s.substr(0, comma), s.substr(comma + 1));
  };

  if (spec == "tpp" || spec == "tpp-argmax") {
    const bool argmax = spec == "tpp-argmax";
    return [lambda, argmax](const tpp::LabeledDataset& train) -> tpp::BatchClassifier {
      const tpp::TrainedTpp model =
          tpp::train_numeric(train, {lambda, tpp::TrainMethod::NumericLsq});
      return [model, train, argmax](const tpp::LabeledDataset& eval_set) {
        if (!argmax)
          return tpp::repro::gaussian_rule_labels(model, train, eval_set);
        std::vector<int> labels;
        for (int c = 0; c < eval_set.n_classes(); ++c)
          for (const auto& rec : eval_set.shots[c])
            labels.push_back(tpp::classify_argmax(model, rec));
        return labels;
      };
    };
  }
  if (spec.rfind("fgda:matched", 0) == 0) {
    std::optional<std::pair<std::string, std::string>> pair;
    if (spec.size() > std::string("fgda:matched").size())
      pair = split_pair(spec.substr(std::string("fgda:matched:").size()));
    return [pair](const tpp::LabeledDataset& train) -> tpp::BatchClassifier {
      std::string a, b;
      if (pair) {
        a = pair->first;
        b = pair->second;
      } else {
        if (train.n_classes() != 2)
          throw tpp::ConfigError(
              "fgda:matched needs a binary dataset; use fgda:matched:a,b");
        a = train.classes[0];
        b = train.classes[1];
      }
      const Eigen::VectorXd h = tpp::matched_filter(train, a, b);
      return [h, train](const tpp::LabeledDataset& eval_set) {
        return tpp::fgda_pipeline({h}, train, eval_set);
      };
    };
  }
  if (spec == "fgda:boxcar") {
    if (!cavity)
      throw tpp::ConfigError("fgda:boxcar needs --config for the drive window");
    const Eigen::VectorXd box = tpp::boxcar_filter(*cavity);
    return [box](const tpp::LabeledDataset& train) -> tpp::BatchClassifier {
      return [box, train](const tpp::LabeledDataset& eval_set) {
        return tpp::fgda_pipeline({box}, train, eval_set);
      };
    };
  }
  if (spec.rfind("multi-fgda:", 0) == 0) {
    const auto pair = split_pair(spec.substr(std::string("multi-fgda:").size()));
    return [pair, seed](const tpp::LabeledDataset& train) -> tpp::BatchClassifier {
      return [pair, seed, train](const tpp::LabeledDataset& eval_set) {
        return tpp::multi_fgda(train, eval_set, pair.first, pair.second, seed);
      };
    };
  }
  throw tpp::ConfigError("unknown pipeline '" + spec + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"trainable temporal post-processing for multi-state readout"};
  app.set_version_flag("--version", std::string("tpp ") + tpp::kVersion);
  int threads = 1;
  app.add_option("--threads", threads, "max worker threads")->capture_default_str();
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--config", sim_config, "JSON config")->required();
  sim->add_option("--out", sim_out, "output .tppd path")->required();
  sim->add_option("--seed", sim_seed, "override config seed");

  // train
  auto* train = app.add_subcommand("train", "train a model from a dataset");
  std::string train_data, train_out, train_method = "lsq";
  double train_lambda = 0.0;
  train->add_option("--data", train_data, "input .tppd")->required();
  train->add_option("--lambda", train_lambda, "regularization")->capture_default_str();
  train->add_option("--method", train_method, "lsq|closed-form")->capture_default_str();
  train->add_option("--out", train_out, "output model.json")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
  std::string eval_data, eval_model, eval_rule = "argmax", eval_report, eval_calib;
  eval_cmd->add_option("--data", eval_data, "evaluation .tppd")->required();
  eval_cmd->add_option("--model", eval_model, "model.json")->required();
  eval_cmd->add_option("--rule", eval_rule, "argmax|gaussian")->capture_default_str();
  eval_cmd->add_option("--calib", eval_calib,
                       "calibration .tppd for the gaussian rule (default: --data)");
  eval_cmd->add_option("--report", eval_report, "output report JSON")->required();

  // filters
  auto* filters_cmd = app.add_subcommand("filters", "export model rows as filters");
  std::string filters_model, filters_out;
  filters_cmd->add_option("--model", filters_model, "model.json")->required();
  filters_cmd->add_option("--out", filters_out, "output CSV")->required();

  // baseline
  auto* base = app.add_subcommand("baseline", "construct a baseline filter");
  std::string base_data, base_filter, base_out, base_config;
  base->add_option("--data", base_data, "calibration .tppd")->required();
  base->add_option("--filter", base_filter, "matched:a,b | boxcar | ova:p")->required();
  base->add_option("--config", base_config, "JSON config (needed for boxcar)");
  base->add_option("--out", base_out, "output CSV")->required();

  // psd
  auto* psd_cmd = app.add_subcommand("psd", "noise power spectral density");
  std::string psd_data, psd_class, psd_out;
  int psd_obs = 0;
  psd_cmd->add_option("--data", psd_data, "input .tppd")->required();
  psd_cmd->add_option("--class", psd_class, "class name")->required();
  psd_cmd->add_option("--obs", psd_obs, "observable index")->capture_default_str();
  psd_cmd->add_option("--out", psd_out, "output CSV")->required();

  // crossval
  auto* cv = app.add_subcommand("crossval", "cross-validated evaluation");
  std::string cv_data, cv_pipeline = "tpp", cv_report, cv_config;
  double cv_frac = 0.8, cv_flip = 0.0, cv_lambda = 0.0;
  int cv_iters = 10;
  std::uint64_t cv_seed = 7;
  cv->add_option("--data", cv_data, "input .tppd")->required();
  cv->add_option("--pipeline", cv_pipeline,
                 "tpp|tpp-argmax|fgda:matched[:a,b]|fgda:boxcar|multi-fgda:p,q")
      ->capture_default_str();
  cv->add_option("--train-frac", cv_frac, "training fraction")->capture_default_str();
  cv->add_option("--iters", cv_iters, "iterations")->capture_default_str();
  cv->add_option("--seed", cv_seed, "split seed")->capture_default_str();
  cv->add_option("--flip", cv_flip, "training label flip probability")
      ->capture_default_str();
  cv->add_option("--lambda", cv_lambda, "tpp regularization")->capture_default_str();
  cv->add_option("--config", cv_config, "JSON config (needed for fgda:boxcar)");
  cv->add_option("--report", cv_report, "output report JSON")->required();

  // repro
  auto* repro_cmd = app.add_subcommand("repro", "run a reproduction recipe");
  std::string repro_name, repro_outdir = "repro_out";
  std::uint64_t repro_seed = 7;
  repro_cmd->add_option("--name", repro_name, "recipe name (or 'list')")->required();
  repro_cmd->add_option("--outdir", repro_outdir, "output directory")
      ->capture_default_str();
  repro_cmd->add_option("--seed", repro_seed, "recipe seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  tpp::set_max_threads(threads);

  if (*sim) {
    SimConfig cfg = parse_sim_config(sim_config);
    if (sim_seed) cfg.seed = *sim_seed;
    const tpp::LabeledDataset ds =
        tpp::simulate(cfg.cavity, cfg.noise, cfg.classes, cfg.n_shots, cfg.seed);
    tpp::write_dataset(ds, sim_out);
    std::cout << "wrote " << sim_out << " (" << ds.total_shots() << " shots, "
              << ds.n_obs() << "x" << ds.n_time() << ")\n";
  } else if (*train) {
    const tpp::LabeledDataset ds = tpp::read_dataset(train_data);
    tpp::TrainedTpp model;
    if (train_method == "lsq") {
      model = tpp::train_numeric(ds, {train_lambda, tpp::TrainMethod::NumericLsq});
    } else if (train_method == "closed-form") {
      model = tpp::train_closed_form(tpp::estimate_moments(ds),
                                     {train_lambda, tpp::TrainMethod::ClosedForm});
    } else {
      throw tpp::ConfigError("unknown method '" + train_method +
                             "' (use lsq|closed-form)");
    }
    // cross-check the other route; large divergence flags poor conditioning
    try {
      const tpp::TrainedTpp other =
          train_method == "lsq"
              ? tpp::train_closed_form(tpp::estimate_moments(ds),
                                       {train_lambda, tpp::TrainMethod::ClosedForm})
              : tpp::train_numeric(ds, {train_lambda, tpp::TrainMethod::NumericLsq});
      const double rel = (model.W - other.W).norm() / model.W.norm();
      if (rel > 1e-6)
        tpp::warn("train: closed-form and numeric routes diverge by " +
                  tpp::format_double(rel) + "; moment matrix may be ill-conditioned");
    } catch (const tpp::Error& e) {
      tpp::warn(std::string("train: cross-check route unavailable (") + e.what() + ")");
    }
    tpp::write_model(model, train_out);
    std::cout << "wrote " << train_out << "\n";
  } else if (*eval_cmd) {
    const tpp::LabeledDataset ds = tpp::read_dataset(eval_data);
    const tpp::TrainedTpp model = tpp::read_model(eval_model);
    if (model.classes != ds.classes)
      throw tpp::DimensionMismatch(
          "model classes do not match dataset classes");
    const tpp::LabeledDataset calib =
        eval_calib.empty() ? ds : tpp::read_dataset(eval_calib);
    const std::vector<int> labels = classify_dataset(model, eval_rule, calib, ds);
    const tpp::EvalReport rep =
        tpp::fidelity(tpp::truth_labels(ds), labels, ds.n_classes());
    ordered_json j = report_to_json(rep, ds.classes);
    j["rule"] = eval_rule;
    std::ofstream out(eval_report);
    if (!out) throw tpp::FormatError("cannot open '" + eval_report + "'");
    out << j.dump(2) << "\n";
    std::cout << "fidelity " << rep.fidelity << " (infidelity " << rep.infidelity
              << "), report in " << eval_report << "\n";
  } else if (*filters_cmd) {
    const tpp::TrainedTpp model = tpp::read_model(filters_model);
    std::vector<Eigen::VectorXd> rows;
    for (int k = 0; k < model.n_classes(); ++k)
      rows.push_back(model.W.row(k).transpose());
    tpp::write_filters_csv(filters_out, model.classes, rows, model.b);
    std::cout << "wrote " << filters_out << "\n";
  } else if (*base) {
    const tpp::LabeledDataset ds = tpp::read_dataset(base_data);
    Eigen::VectorXd h;
    if (base_filter.rfind("matched:", 0) == 0) {
      const auto rest = base_filter.substr(8);
      const auto comma = rest.find(',');
      if (comma == std::string::npos)
        throw tpp::ConfigError("matched filter needs 'matched:a,b'");
      h = tpp::matched_filter(ds, rest.substr(0, comma), rest.substr(comma + 1));
    } else if (base_filter == "boxcar") {
      if (base_config.empty())
        throw tpp::ConfigError("boxcar baseline needs --config");
      h = tpp::boxcar_filter(parse_sim_config(base_config).cavity);
    } else if (base_filter.rfind("ova:", 0) == 0) {
      h = tpp::one_vs_all_filter(ds, base_filter.substr(4));
    } else {
      throw tpp::ConfigError("unknown baseline '" + base_filter + "'");
    }
    std::string label = base_filter;
    for (auto& ch : label)
      if (ch == ',') ch = '+';
    tpp::write_filters_csv(base_out, {label}, {h}, Eigen::VectorXd::Zero(1));
    std::cout << "wrote " << base_out << "\n";
  } else if (*psd_cmd) {
    const tpp::LabeledDataset ds = tpp::read_dataset(psd_data);
    const Eigen::VectorXd s = tpp::noise_psd(ds, psd_class, psd_obs);
    const auto freqs = tpp::psd_frequencies(ds.n_time(), ds.dt);
    tpp::CsvWriter csv(psd_out);
    csv.header({"frequency_hz", "psd"});
    for (std::size_t m = 0; m < freqs.size(); ++m)
      csv.numeric_row({freqs[m], s[static_cast<Eigen::Index>(m)]});
    std::cout << "wrote " << psd_out << "\n";
  } else if (*cv) {
    const tpp::LabeledDataset ds = tpp::read_dataset(cv_data);
    std::optional<tpp::CavityConfig> cavity;
    if (!cv_config.empty()) cavity = parse_sim_config(cv_config).cavity;
    const tpp::PipelineTrainer trainer =
        make_pipeline(cv_pipeline, cv_lambda, cavity, cv_seed);
    const tpp::CrossValResult res =
        tpp::cross_validate(ds, trainer, cv_frac, cv_iters, cv_seed, cv_flip);
    ordered_json j;
    j["pipeline"] = cv_pipeline;
    j["train_frac"] = res.train_frac;
    j["iters"] = res.n_iter;
    j["seed"] = res.seed;
    j["label_flip_prob"] = res.label_flip_prob;
    j["fidelity_mean"] = res.fidelity_mean;
    j["fidelity_std"] = res.fidelity_std;
    j["iterations"] = ordered_json::array();
    for (const auto& rep : res.iterations)
      j["iterations"].push_back(report_to_json(rep, ds.classes));
    std::ofstream out(cv_report);
    if (!out) throw tpp::FormatError("cannot open '" + cv_report + "'");
    out << j.dump(2) << "\n";
    std::cout << "fidelity " << res.fidelity_mean << " +- " << res.fidelity_std
              << " over " << res.n_iter << " iterations, report in " << cv_report
              << "\n";
  } else if (*repro_cmd) {
    if (repro_name == "list") {
      for (const auto& n : tpp::repro_names()) std::cout << n << "\n";
      return 0;
    }
    const tpp::ReproReport rep = tpp::run_repro(repro_name, repro_outdir, repro_seed);
    for (const auto& a : rep.assertions)
      std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name << " (" << a.detail
                << ")\n";
    for (const auto& f : rep.csv_files) std::cout << "wrote " << f << "\n";
    std::cout << (rep.all_pass() ? "recipe passed\n" : "recipe FAILED\n");
    return rep.all_pass() ? 0 : 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tpp::Error& e) {
    nlohmann::json err{{"error", e.kind()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
