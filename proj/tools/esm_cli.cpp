#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "esm/io.hpp"
#include "esm/oracle.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNoConvergence = 3;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw esm::ParameterError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

esm::MarketInstance build_instance(const esm::RunConfig& cfg) {
  switch (cfg.source) {
    case esm::InstanceSource::builtin:
      return esm::builtin_three_prosumer();
    case esm::InstanceSource::file: {
      if (cfg.instance_file.empty())
        throw esm::ParameterError("source=file needs instance_file");
      esm::MarketInstance inst;
      inst.prosumers = esm::read_instance_rows(cfg.instance_file);
      inst.a = cfg.a;
      return inst;
    }
    case esm::InstanceSource::random:
      return cfg.profitable
                 ? esm::random_instance_profitable(cfg.I, cfg.a, cfg.instance_seed)
                 : esm::random_instance(cfg.I, cfg.a, cfg.instance_seed);
  }
  throw esm::ParameterError("unreachable instance source");
}

std::string out_path(const esm::RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_solve(const esm::RunConfig& cfg) {
  esm::MarketInstance inst = build_instance(cfg);
  const int I = inst.size();
  esm::EquilibriumSolution social = esm::solve_social_optimum(inst);
  esm::EquilibriumSolution gne = esm::solve_gne_direct(inst);
  esm::EquilibriumSolution self = esm::solve_self_sufficiency_profile(inst);
  esm::OutcomeReport rep = esm::make_outcome_report(inst, gne, social, self);

  std::vector<std::string> cols = {"id",       "p_self", "d_self", "j_self",
                                   "p_social", "d_social", "j_social", "p_gne",
                                   "d_gne",    "b_gne",  "j_gne",  "gamma_gne",
                                   "payment_gne"};
  std::vector<std::vector<double>> rows;
  double total_self = 0;
  for (int i = 0; i < I; ++i) {
    double j_self = esm::net_cost(inst.prosumers[i], self.p[i], self.d[i]);
    double j_social = esm::net_cost(inst.prosumers[i], social.p[i], social.d[i]);
    total_self += j_self;
    rows.push_back({static_cast<double>(inst.prosumers[i].id), self.p[i], self.d[i], j_self,
                    social.p[i], social.d[i], j_social, gne.p[i], gne.d[i], gne.b[i],
                    rep.j_gne[i], rep.gamma[i], rep.payment[i]});
  }
  esm::write_csv(out_path(cfg, "solution.csv"), cols, rows);

  esm::write_csv(
      out_path(cfg, "market.csv"),
      {"I", "a", "lambda_social", "dual_lo", "dual_hi", "zeta", "total_self", "total_social",
       "total_gne", "poa", "poa_abs_gap", "poa_bound", "price_gap", "budget_gap",
       "pareto_pass", "pareto_any_strict", "kkt_social", "kkt_gne"},
      {{static_cast<double>(I), inst.a, social.lambda, social.dual_lo, social.dual_hi,
        gne.lambda, total_self, rep.total_social, rep.total_gne, rep.poa, rep.poa_abs_gap,
        rep.poa_bound, rep.price_gap, rep.budget_gap, rep.pareto_pass ? 1.0 : 0.0,
        rep.pareto_any_strict ? 1.0 : 0.0, social.kkt, gne.kkt}});

  std::cout << "I=" << I << " a=" << esm::format_number(inst.a) << "\n"
            << "social optimum: total " << esm::format_number(rep.total_social)
            << " at price " << esm::format_number(social.lambda) << "\n"
            << "sharing equilibrium: total " << esm::format_number(rep.total_gne)
            << " at price " << esm::format_number(gne.lambda) << "\n"
            << "standalone: total " << esm::format_number(total_self) << "\n"
            << "efficiency ratio " << esm::format_number(rep.poa) << " (bound "
            << esm::format_number(rep.poa_bound) << "), everyone at least as well off: "
            << (rep.pareto_pass ? "yes" : "no") << "\n"
            << "wrote solution.csv and market.csv to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_bid(const esm::RunConfig& cfg) {
  esm::MarketInstance inst = build_instance(cfg);
  const int I = inst.size();
  auto [sol, trace] = esm::run_bidding(inst, cfg.bidding);

  std::ofstream out(out_path(cfg, "trace.csv"));
  if (!out) throw esm::ParameterError("cannot write trace.csv");
  out << "k,lambda_prev,lambda";
  for (int i = 1; i <= I; ++i) out << ",p_" << i;
  for (int i = 1; i <= I; ++i) out << ",d_" << i;
  for (int i = 1; i <= I; ++i) out << ",b_" << i;
  for (int i = 1; i <= I; ++i) out << ",updated_" << i;
  out << ",termination\n";
  auto write_vec = [&](const Eigen::VectorXd& v) {
    for (int i = 0; i < I; ++i) out << ',' << esm::format_number(v[i]);
  };
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << esm::format_number(rec.lambda_prev) << ','
        << esm::format_number(rec.lambda);
    write_vec(rec.p);
    write_vec(rec.d);
    write_vec(rec.b);
    for (int i = 0; i < I; ++i) out << ',' << (rec.updated[i] ? 1 : 0);
    out << ",\n";
  }
  const char* term = trace.termination == esm::Termination::converged ? "converged"
                     : trace.termination == esm::Termination::diverged ? "diverged"
                                                                       : "max_iterations";
  out << "final," << esm::format_number(sol.lambda) << ',' << esm::format_number(sol.lambda);
  write_vec(sol.p);
  write_vec(sol.d);
  write_vec(sol.b);
  for (int i = 0; i < I; ++i) out << ",1";
  out << ',' << term << '\n';
  out.close();

  std::cout << "bidding " << term << " after " << sol.iterations << " iterations, price "
            << esm::format_number(sol.lambda) << ", final gap "
            << esm::format_number(trace.final_gap) << "\n"
            << "market sensitivity bound "
            << (trace.sensitivity_satisfied ? "satisfied" : "NOT satisfied") << " (a="
            << esm::format_number(inst.a) << ", needs "
            << esm::format_number(esm::min_market_sensitivity(inst.prosumers, I)) << ")\n"
            << "wrote trace.csv to " << cfg.out_dir << "\n";
  return trace.termination == esm::Termination::converged ? 0 : kExitNoConvergence;
}

int cmd_experiment(const esm::RunConfig& cfg) {
  if (cfg.experiment == "misreport") {
    esm::MarketInstance inst = build_instance(cfg);
    auto sharing =
        esm::misreport_sweep(inst, cfg.misreport_target, esm::Regime::sharing);
    auto central =
        esm::misreport_sweep(inst, cfg.misreport_target, esm::Regime::centralized);
    esm::write_report_csv(out_path(cfg, "misreport_sharing.csv"), sharing);
    esm::write_report_csv(out_path(cfg, "misreport_centralized.csv"), central);
    std::cout << "wrote misreport_sharing.csv and misreport_centralized.csv ("
              << sharing.rows.size() << " scales) to " << cfg.out_dir << "\n";
    return 0;
  }
  if (cfg.experiment == "poa_vs_size") {
    auto rep = esm::poa_vs_size(cfg.sizes, cfg.a, cfg.n_seeds);
    esm::write_report_csv(out_path(cfg, "poa_vs_size.csv"), rep);
    std::cout << "wrote poa_vs_size.csv (" << rep.rows.size() << " rows) to " << cfg.out_dir
              << "\n";
    return 0;
  }
  if (cfg.experiment == "diversity") {
    auto rep = esm::diversity_experiment(cfg.I, cfg.type_counts, cfg.n_draws, cfg.a);
    esm::write_report_csv(out_path(cfg, "diversity.csv"), rep);
    std::cout << "wrote diversity.csv (" << rep.rows.size() << " rows) to " << cfg.out_dir
              << "\n";
    return 0;
  }
  if (cfg.experiment == "delay") {
    esm::MarketInstance inst = build_instance(cfg);
    auto rep = esm::delay_experiment(inst, cfg.bidding, cfg.delays, cfg.n_seeds);
    esm::write_report_csv(out_path(cfg, "delay.csv"), rep);
    std::cout << "wrote delay.csv (" << rep.rows.size() << " rows) to " << cfg.out_dir
              << "\n";
    return 0;
  }
  if (cfg.experiment == "sensitivity") {
    esm::MarketInstance inst = build_instance(cfg);
    auto rep = esm::sensitivity_experiment(inst, cfg.a_values, cfg.bidding);
    esm::write_report_csv(out_path(cfg, "sensitivity.csv"), rep);
    std::cout << "wrote sensitivity.csv (" << rep.rows.size() << " rows) to " << cfg.out_dir
              << "\n";
    return 0;
  }
  throw esm::ParameterError("unknown experiment tag '" + cfg.experiment +
                            "' (use misreport, poa_vs_size, diversity, delay, or sensitivity)");
}

struct CliOverrides {
  std::map<std::string, std::string> kv;
};

void add_common_options(CLI::App* sub, std::string& config_path, CliOverrides& over) {
  sub->add_option("--config", config_path, "key = value configuration file");
  auto track = [&over](const std::string& key) {
    return [&over, key](const std::string& v) { over.kv[key] = v; };
  };
  sub->add_option_function<std::string>("--out", track("out"), "output directory");
  sub->add_option_function<std::string>(
      "--seed", track("seed"), "seed for instance draws and the asynchronous schedule");
  sub->add_option_function<std::string>("--a", track("a"), "market sensitivity");
  sub->add_option_function<std::string>("--epsilon", track("epsilon"),
                                        "bidding price tolerance");
  sub->add_option_function<std::string>("--max-iter", track("max_iter"),
                                        "bidding iteration cap");
  sub->add_option_function<std::string>("--mode", track("mode"),
                                        "bidding mode: strategic or price-taker");
  sub->add_option_function<std::string>("--schedule", track("schedule"),
                                        "bidding schedule: sync or async");
  sub->add_option_function<std::string>("--miss-prob", track("miss_prob"),
                                        "asynchronous miss probability");
  sub->add_option_function<std::string>("--max-delay", track("max_delay"),
                                        "asynchronous delay cap");
  sub->add_option_function<std::string>("--source", track("source"),
                                        "instance source: builtin, file, or random");
  sub->add_option_function<std::string>("--instance-file", track("instance_file"),
                                        "prosumer table for source=file");
  sub->add_option_function<std::string>("--I", track("I"),
                                        "population size for source=random");
  sub->add_option_function<std::string>("--experiment", track("experiment"),
                                        "experiment tag for the experiment subcommand");
  sub->add_option_function<std::string>("--target", track("target"),
                                        "misreporting prosumer index (0-based)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prosumer energy sharing market simulator"};
  app.require_subcommand(1);

  std::string config_solve, config_bid, config_exp;
  CliOverrides over_solve, over_bid, over_exp;
  CLI::App* solve = app.add_subcommand("solve", "social optimum, sharing equilibrium, and standalone baseline");
  CLI::App* bid = app.add_subcommand("bid", "iterative bidding with a full trace");
  CLI::App* experiment = app.add_subcommand("experiment", "parameter sweeps as CSV series");
  add_common_options(solve, config_solve, over_solve);
  add_common_options(bid, config_bid, over_bid);
  add_common_options(experiment, config_exp, over_exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    esm::RunConfig cfg;
    std::string config_path;
    CliOverrides* over = nullptr;
    if (solve->parsed()) {
      cfg.command = "solve";
      config_path = config_solve;
      over = &over_solve;
    } else if (bid->parsed()) {
      cfg.command = "bid";
      config_path = config_bid;
      over = &over_bid;
    } else {
      cfg.command = "experiment";
      config_path = config_exp;
      over = &over_exp;
    }
    if (!config_path.empty())
      esm::apply_config(cfg, esm::parse_key_values(read_text_file(config_path)));
    esm::apply_config(cfg, over->kv);

    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "bid") return cmd_bid(cfg);
    return cmd_experiment(cfg);
  } catch (const esm::AssumptionViolation& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const esm::BracketError& e) {
    std::cerr << "solver failed: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const esm::ConsistencyError& e) {
    std::cerr << "inconsistent result: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
