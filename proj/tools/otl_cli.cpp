// Command-line front end. Talks to the library only through otl.h.

#include "otl/otl.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int report(otl_status s) {
  if (s == OTL_OK) return 0;
  std::cerr << "error [" << otl_status_name(s) << "] " << otl_last_error() << '\n';
  return static_cast<int>(s);
}

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "experiment config file");
  if (needs_config) opt->required();
  app->add_option("--out", c.out, "output directory (overrides output_dir)");
  app->add_option("--seed", c.seed, "seed (overrides the config)");
  app->add_option("--threads", c.threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
}

otl_status apply_threads(const Common& c) {
  if (c.threads) return otl_set_threads(*c.threads);
  if (const char* env = std::getenv("OTL_THREADS")) {
    try {
      return otl_set_threads(std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "error [config error] OTL_THREADS: expected an integer, got '" << env << "'\n";
      return OTL_ERR_CONFIG;
    }
  }
  return OTL_OK;
}

using ConfigPtr = std::unique_ptr<otl_config, decltype(&otl_config_free)>;

otl_status load(const Common& c, ConfigPtr& out) {
  otl_config* raw = nullptr;
  const otl_status s = c.config.empty() ? otl_config_new(&raw) : otl_config_load(c.config.c_str(), &raw);
  if (s != OTL_OK) return s;
  out.reset(raw);
  if (c.seed) {
    if (auto st = otl_config_set(raw, "seed", std::to_string(*c.seed).c_str()); st != OTL_OK) return st;
  }
  if (!c.out.empty()) {
    if (auto st = otl_config_set(raw, "output_dir", c.out.c_str()); st != OTL_OK) return st;
  }
  return otl_config_validate(raw);
}

std::string output_dir(const otl_config* cfg) {
  size_t needed = 0;
  otl_config_get(cfg, "output_dir", nullptr, 0, &needed);
  std::string buf(needed, '\0');
  otl_config_get(cfg, "output_dir", buf.data(), buf.size(), nullptr);
  buf.resize(needed ? needed - 1 : 0);
  return buf;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orlicz transmission lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", otl_version());

  Common validate_c, solve_c, oracle_c, metrics_c, conv_c, serrin_c, iterate_c;
  auto* validate = app.add_subcommand("validate-g", "check the structure constants of the model");
  add_common(validate, validate_c, false);
  auto* solve = app.add_subcommand("solve", "minimize the discrete energy and write the artifacts");
  add_common(solve, solve_c, true);
  auto* oracle = app.add_subcommand("oracle", "radial closed form and its profile");
  add_common(oracle, oracle_c, false);
  auto* metrics = app.add_subcommand("metrics", "regularity report from solve artifacts");
  add_common(metrics, metrics_c, true);
  std::string artifacts;
  metrics->add_option("--artifacts", artifacts, "directory holding the solve artifacts (default: output dir)");
  auto* conv = app.add_subcommand("convergence", "errors against the radial oracle over mesh sizes");
  add_common(conv, conv_c, true);
  std::vector<double> h_list;
  conv->add_option("--h-list", h_list, "mesh sizes (default: convergence.h)")->delimiter(',');

  auto* lemmas = app.add_subcommand("lemmas", "randomized checks of the auxiliary lemmas");
  lemmas->require_subcommand(1);
  auto* serrin = lemmas->add_subcommand("serrin", "numeric inequality with explicit constant");
  add_common(serrin, serrin_c, false);
  std::size_t serrin_trials = 100000;
  double serrin_p = 3.0;
  serrin->add_option("--trials", serrin_trials, "number of random instances")->check(CLI::PositiveNumber);
  serrin->add_option("--p", serrin_p, "exponent p > 0");
  auto* iterate = lemmas->add_subcommand("iterate", "iteration lemma on extremal instances");
  add_common(iterate, iterate_c, false);
  std::size_t iterate_trials = 1000;
  iterate->add_option("--trials", iterate_trials, "number of random instances")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return OTL_ERR_CONFIG;
  }

  const auto run = [](const Common& c, auto&& body) -> int {
    if (auto s = apply_threads(c); s != OTL_OK) return report(s);
    ConfigPtr cfg(nullptr, &otl_config_free);
    if (auto s = load(c, cfg); s != OTL_OK) return report(s);
    return body(cfg.get());
  };

  if (*validate) {
    return run(validate_c, [](otl_config* cfg) {
      int pass = 0;
      if (auto s = otl_run_validate_g(cfg, nullptr, &pass); s != OTL_OK) return report(s);
      std::cout << otl_last_summary() << '\n';
      if (!pass) {
        std::cerr << "error [config error] model.g0/model.g1: claimed bounds fail the ellipticity check\n";
        return static_cast<int>(OTL_ERR_CONFIG);
      }
      return 0;
    });
  }
  if (*solve) {
    return run(solve_c, [](otl_config* cfg) {
      if (auto s = otl_run_solve(cfg, nullptr, nullptr); s != OTL_OK) return report(s);
      std::cout << otl_last_summary() << '\n';
      return 0;
    });
  }
  if (*oracle) {
    return run(oracle_c, [](otl_config* cfg) {
      if (auto s = otl_run_oracle(cfg, nullptr); s != OTL_OK) return report(s);
      std::cout << otl_last_summary() << '\n';
      return 0;
    });
  }
  if (*metrics) {
    return run(metrics_c, [&](otl_config* cfg) {
      const std::string out = output_dir(cfg);
      const std::string dir = artifacts.empty() ? out : artifacts;
      if (auto s = otl_run_metrics(cfg, dir.c_str(), out.c_str(), nullptr); s != OTL_OK) return report(s);
      std::cout << otl_last_summary() << '\n';
      return 0;
    });
  }
  if (*conv) {
    return run(conv_c, [&](otl_config* cfg) {
      const otl_status s = h_list.empty() ? otl_run_convergence(cfg, nullptr, 0, nullptr)
                                          : otl_run_convergence(cfg, h_list.data(), h_list.size(), nullptr);
      if (s != OTL_OK) return report(s);
      std::cout << otl_last_summary() << '\n';
      return 0;
    });
  }
  if (*serrin) {
    return run(serrin_c, [&](otl_config* cfg) {
      const std::uint64_t seed = serrin_c.seed.value_or(1);
      size_t violations = 0;
      const std::string out = output_dir(cfg);
      if (auto s = otl_run_lemma_serrin(serrin_p, serrin_trials, seed, out.c_str(), &violations); s != OTL_OK) {
        return report(s);
      }
      std::cout << otl_last_summary() << '\n';
      return violations == 0 ? 0 : 1;
    });
  }
  if (*iterate) {
    return run(iterate_c, [&](otl_config* cfg) {
      const std::uint64_t seed = iterate_c.seed.value_or(1);
      size_t failures = 0;
      const std::string out = output_dir(cfg);
      if (auto s = otl_run_lemma_iterate(iterate_trials, seed, out.c_str(), &failures); s != OTL_OK) {
        return report(s);
      }
      std::cout << otl_last_summary() << '\n';
      return failures == 0 ? 0 : 1;
    });
  }
  return 0;
}
