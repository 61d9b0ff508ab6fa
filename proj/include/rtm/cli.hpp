#pragma once

// Command-line front end: `rtm <subcommand> [flags]`.
//
// Exit codes: 0 success, 1 usage error, 2 data or ingestion error,
// 3 numerical singularity or failed inference. Output files are written only
// after every computation has succeeded; diagnostics go to the error stream.

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rtm/csv_io.hpp"
#include "rtm/errors.hpp"
#include "rtm/experiments.hpp"
#include "rtm/model.hpp"
#include "rtm/report_json.hpp"
#include "rtm/simulate.hpp"

namespace rtm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

namespace detail {

struct ModelFlags {
  double mu = 141.0;
  double sigma = 13.6;
  double alpha = -20.0;
  double beta = 0.0;
  double nu = 10.0;
  double delta = 9.1;

  void attach(CLI::App* app) {
    app->add_option("--mu", mu, "population mean of true pre-test values")->capture_default_str();
    app->add_option("--sigma", sigma, "between-subject SD")->capture_default_str();
    app->add_option("--alpha", alpha, "additive treatment effect")->capture_default_str();
    app->add_option("--beta", beta, "differential treatment slope")->capture_default_str();
    app->add_option("--nu", nu, "treatment-effect SD")->capture_default_str();
    app->add_option("--delta", delta, "within-subject (measurement) SD")->capture_default_str();
  }

  PopulationParams params() const {
    return PopulationParams::from_std_devs(mu, sigma, alpha, beta, nu, delta);
  }
};

struct ErrorFlags {
  std::optional<double> repeatability;
  std::optional<double> error_var;

  void attach(CLI::App* app) {
    auto* r = app->add_option("--repeatability", repeatability,
                              "repeatability R for the Blomqvist correction");
    auto* e = app->add_option("--error-var", error_var,
                              "within-subject variance delta^2 for the Blomqvist correction");
    r->excludes(e);
    e->excludes(r);
  }

  std::optional<ErrorSpec> spec() const {
    if (repeatability) return Repeatability{*repeatability};
    if (error_var) return ErrorVariance{*error_var};
    return std::nullopt;
  }
};

// Collects output documents; flushed only on success.
class Outputs {
 public:
  Outputs(std::ostream& stdout_stream) : stdout_(stdout_stream) {}

  void add(const std::string& path, std::string content) {
    docs_.emplace_back(path, std::move(content));
  }

  void flush() {
    for (const auto& [path, content] : docs_) {
      if (path.empty() || path == "-") {
        stdout_ << content;
        continue;
      }
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IngestionError("cannot write output file: " + path);
      f << content;
      if (!f) throw IngestionError("failed writing output file: " + path);
    }
  }

 private:
  std::ostream& stdout_;
  std::vector<std::pair<std::string, std::string>> docs_;
};

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace detail

inline int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regression-to-the-mean slope analysis and simulation toolkit", "rtm"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_path;

  // population
  detail::ModelFlags pop_model;
  std::vector<double> pop_betas{0.0, -0.5, -1.5};
  double ratio_min = 0.0, ratio_max = 2.0, ratio_step = 0.05;
  auto* population = app.add_subcommand("population", "closed-form slope sweep (CSV)");
  pop_model.attach(population);
  population->add_option("--betas", pop_betas, "comma-separated beta values")
      ->delimiter(',')
      ->capture_default_str();
  population->add_option("--ratio-min", ratio_min, "smallest delta^2/sigma^2")->capture_default_str();
  population->add_option("--ratio-max", ratio_max, "largest delta^2/sigma^2")->capture_default_str();
  population->add_option("--ratio-step", ratio_step, "grid step")->capture_default_str();
  population->add_option("--out", out_path, "output path (default standard output)");

  // simulate
  detail::ModelFlags sim_model;
  std::size_t sim_n = 100;
  bool with_latent = false;
  auto* simulate = app.add_subcommand("simulate", "draw one sample (CSV)");
  sim_model.attach(simulate);
  simulate->add_option("--n", sim_n, "subjects")->capture_default_str();
  simulate->add_option("--seed", seed, "master seed")->capture_default_str();
  simulate->add_flag("--latent", with_latent, "include true values X1,X2");
  simulate->add_option("--dump,--out", out_path, "output path (default standard output)");

  // sampling-dist
  detail::ModelFlags sd_model;
  detail::ErrorFlags sd_error;
  std::size_t sd_n = 100, sd_reps = 1000;
  std::string sd_csv;
  auto* sampling = app.add_subcommand("sampling-dist", "slope sampling distributions (JSON)");
  sd_model.attach(sampling);
  sd_error.attach(sampling);
  sampling->add_option("--n", sd_n, "subjects per sample")->capture_default_str();
  sampling->add_option("--reps", sd_reps, "samples")->capture_default_str();
  sampling->add_option("--seed", seed, "master seed")->capture_default_str();
  sampling->add_option("--threads", threads, "worker threads (0 = all cores)");
  sampling->add_option("--out", out_path, "JSON report path (default standard output)");
  sampling->add_option("--csv", sd_csv, "per-replicate slopes CSV path");

  // head-to-head
  detail::ModelFlags hh_model;
  detail::ErrorFlags hh_error;
  std::size_t hh_n = 100, hh_reps = 10000;
  std::vector<double> hh_betas = default_head_to_head_betas();
  std::string hh_csv;
  auto* head = app.add_subcommand("head-to-head", "P(crude beats corrected) per beta (JSON)");
  hh_model.attach(head);
  hh_error.attach(head);
  head->add_option("--n", hh_n, "subjects per sample")->capture_default_str();
  head->add_option("--reps", hh_reps, "samples per beta")->capture_default_str();
  head->add_option("--betas", hh_betas, "comma-separated beta grid (default -2.0:0.1:0.5)")
      ->delimiter(',');
  head->add_option("--seed", seed, "master seed")->capture_default_str();
  head->add_option("--threads", threads, "worker threads (0 = all cores)");
  head->add_option("--out", out_path, "JSON report path (default standard output)");
  head->add_option("--csv", hh_csv, "CSV table path");

  // boot-demo and analyze share the inference flags
  std::size_t boot = 10000, n_perm = 999;
  double level = 0.95;
  std::string replicates_csv;

  detail::ModelFlags bd_model;
  detail::ErrorFlags bd_error;
  std::size_t bd_n = 100;
  auto* demo = app.add_subcommand("boot-demo", "bootstrap test on one simulated sample (JSON)");
  bd_model.attach(demo);
  bd_error.attach(demo);
  demo->add_option("--n", bd_n, "subjects")->capture_default_str();
  demo->add_option("--boot", boot, "bootstrap resamples")->capture_default_str();
  demo->add_option("--level", level, "confidence level")->capture_default_str();
  demo->add_option("--n-perm", n_perm, "permutations")->capture_default_str();
  demo->add_option("--seed", seed, "master seed")->capture_default_str();
  demo->add_option("--threads", threads, "worker threads (0 = all cores)");
  demo->add_option("--out", out_path, "JSON report path (default standard output)");
  demo->add_option("--replicates", replicates_csv, "crude bootstrap replicates CSV path");

  detail::ErrorFlags an_error;
  std::string data_path, adjusted_berry, adjusted_blomqvist;
  std::optional<double> known_r;
  bool negate_change = false;
  auto* analyze = app.add_subcommand("analyze", "analyze a pre/post dataset (JSON)");
  analyze->add_option("--data", data_path, "CSV with columns x1,x2")->required();
  an_error.attach(analyze);
  analyze->add_option("--known-repeatability", known_r,
                      "repeatability used for the beta = 0 decision");
  analyze->add_flag("--negate-change", negate_change, "report slopes of x1 - x2");
  analyze->add_option("--boot", boot, "bootstrap resamples")->capture_default_str();
  analyze->add_option("--level", level, "confidence level")->capture_default_str();
  analyze->add_option("--n-perm", n_perm, "permutations")->capture_default_str();
  analyze->add_option("--seed", seed, "master seed")->capture_default_str();
  analyze->add_option("--threads", threads, "worker threads (0 = all cores)");
  analyze->add_option("--out", out_path, "JSON report path (default standard output)");
  analyze->add_option("--replicates", replicates_csv, "crude bootstrap replicates CSV path");
  analyze->add_option("--adjusted-berry", adjusted_berry, "Berry adjusted change CSV path (d_adj)");
  analyze->add_option("--adjusted-blomqvist", adjusted_blomqvist,
                      "Blomqvist adjusted change CSV path (d_adj)");

  std::vector<const char*> argv{"rtm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "rtm: " << e.what() << "\n";
    return kUsage;
  }

  const Parallelism par{threads};
  detail::Outputs outputs(out);
  try {
    if (population->parsed()) {
      const auto rows = population_sweep(pop_model.params(), pop_betas,
                                         inclusive_grid(ratio_min, ratio_max, ratio_step));
      outputs.add(out_path, detail::render([&](std::ostream& os) { write_sweep_csv(os, rows); }));
    } else if (simulate->parsed()) {
      const auto sample = draw_sample(sim_model.params(), sim_n, SeedSpec{seed, 0});
      outputs.add(out_path, detail::render([&](std::ostream& os) {
                    if (with_latent) write_sample_csv(os, sample);
                    else write_sample_csv(os, sample.observed);
                  }));
    } else if (sampling->parsed()) {
      const auto params = sd_model.params();
      const auto spec = sd_error.spec().value_or(default_simulation_error_spec(params));
      const auto report = run_sampling_distribution(params, sd_n, sd_reps, spec, seed, par);
      outputs.add(out_path, detail::dump(to_json(report)));
      if (!sd_csv.empty()) {
        outputs.add(sd_csv,
                    detail::render([&](std::ostream& os) { write_replicates_csv(os, report); }));
      }
    } else if (head->parsed()) {
      const auto params = hh_model.params();
      const auto spec = hh_error.spec().value_or(default_simulation_error_spec(params));
      const auto report = run_head_to_head(params, hh_betas, hh_n, hh_reps, spec, seed, par);
      outputs.add(out_path, detail::dump(to_json(report)));
      if (!hh_csv.empty()) {
        outputs.add(hh_csv,
                    detail::render([&](std::ostream& os) { write_head_to_head_csv(os, report); }));
      }
    } else if (demo->parsed()) {
      const auto report = run_bootstrap_demo(bd_model.params(), bd_n, boot, seed, bd_error.spec(),
                                             level, n_perm, par);
      outputs.add(out_path, detail::dump(to_json(report, "boot-demo")));
      if (!replicates_csv.empty()) {
        outputs.add(replicates_csv, detail::render([&](std::ostream& os) {
                      write_column_csv(os, "slope", report.bootstrap_crude.replicates);
                    }));
      }
    } else if (analyze->parsed()) {
      auto data = read_sample_csv(data_path);
      for (const auto& w : data.warnings) err << "rtm: warning: " << w << "\n";
      AnalyzeOptions options;
      options.resamples = boot;
      options.level = level;
      options.n_perm = n_perm;
      options.known_repeatability = known_r;
      options.negate_change = negate_change;
      auto report = analyze_dataset(data.sample, an_error.spec(), options, seed, par, data_path);
      report.warnings.insert(report.warnings.begin(), data.warnings.begin(), data.warnings.end());
      outputs.add(out_path, detail::dump(to_json(report, "analyze")));
      if (!replicates_csv.empty()) {
        outputs.add(replicates_csv, detail::render([&](std::ostream& os) {
                      write_column_csv(os, "slope", report.bootstrap_crude.replicates);
                    }));
      }
      if (!adjusted_berry.empty()) {
        outputs.add(adjusted_berry, detail::render([&](std::ostream& os) {
                      write_column_csv(os, "d_adj", report.berry.adjusted_change);
                    }));
      }
      if (!adjusted_blomqvist.empty()) {
        if (!report.blomqvist) {
          throw UsageError("--adjusted-blomqvist needs --repeatability or --error-var");
        }
        outputs.add(adjusted_blomqvist, detail::render([&](std::ostream& os) {
                      write_column_csv(os, "d_adj", report.blomqvist->adjusted_change);
                    }));
      }
    }
    outputs.flush();
  } catch (const UsageError& e) {
    err << "rtm: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "rtm: invalid parameter: " << e.what() << "\n";
    return kUsage;
  } catch (const IngestionError& e) {
    err << "rtm: data error: " << e.what() << "\n";
    return kData;
  } catch (const SampleSizeError& e) {
    err << "rtm: data error: " << e.what() << "\n";
    return kData;
  } catch (const DegenerateSampleError& e) {
    err << "rtm: data error: " << e.what() << "\n";
    return kData;
  } catch (const SingularityError& e) {
    err << "rtm: numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const InferenceError& e) {
    err << "rtm: numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

}  // namespace rtm::cli
