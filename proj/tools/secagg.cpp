// Experiment harness: run one aggregation epoch, sweep over network sizes,
// check the partition majority bound by Monte Carlo, or reproduce the
// interception lower-bound experiment. All experiments are deterministic
// given --seed.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "secagg/exp/experiments.hpp"

using namespace secagg;

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else write_text(out_path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-ring secure aggregation experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  uint64_t seed = 0;
  bool seed_set = false;
  uint32_t trials = 0;
  std::string backend_flag;
  bool trace = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_path, "output file (stdout when omitted)");
  app.add_option("--seed", seed, "run seed")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--trials", trials, "trial count for the Monte Carlo experiments");
  app.add_option("--backend", backend_flag, "crypto backend: mock or real");
  app.add_flag("--trace", trace, "dump the delivery trace next to the output");

  auto* run_cmd = app.add_subcommand("run", "one aggregation epoch, one CSV row");
  bool dump_overlay_flag = false;
  run_cmd->add_flag("--dump-overlay", dump_overlay_flag, "also dump the overlay snapshot");

  auto* sweep_cmd = app.add_subcommand("sweep", "scaling sweep over n");
  std::vector<uint32_t> sweep_ns{64, 128, 256, 512};
  sweep_cmd->add_option("--n-list", sweep_ns, "network sizes");

  auto* mc_cmd = app.add_subcommand("partition-mc", "partition honest-majority Monte Carlo");
  uint32_t mc_n = 1024, mc_s = 40;
  double mc_tau = 0.3;
  mc_cmd->add_option("--n", mc_n, "node count");
  mc_cmd->add_option("--tau", mc_tau, "malicious fraction");
  mc_cmd->add_option("--cluster-size", mc_s, "cluster size s");

  auto* lb_cmd = app.add_subcommand("lowerbound", "interception lower-bound experiment");
  exp::LowerBoundConfig lb;
  lb_cmd->add_option("--n", lb.n, "node count");
  lb_cmd->add_option("--epsilon", lb.epsilon, "malicious fraction");
  lb_cmd->add_option("--omega-plus", lb.omega_plus, "messages per sender");
  lb_cmd->add_option("--omega-minus", lb.omega_minus, "reception cap per node");
  lb_cmd->add_option("--c-frac", lb.c_frac, "fraction of low-degree senders");

  auto* dump_cmd = app.add_subcommand("dump-overlay", "print the overlay snapshot");

  CLI11_PARSE(app, argc, argv);

  try {
    exp::RunConfig config;
    if (!config_path.empty()) config = exp::RunConfig::from_file(config_path);
    if (seed_set) config.seed = seed;
    if (!backend_flag.empty()) config.backend = backend_flag;

    if (run_cmd->parsed()) {
      auto art = exp::run_once(config, trace, dump_overlay_flag);
      std::string csv = exp::csv_header() + "\n" + exp::to_csv(art.row) + "\n";
      emit(out_path, csv);
      if (trace) write_text(out_path.empty() ? "run.trace" : out_path + ".trace", art.trace);
      if (dump_overlay_flag)
        write_text(out_path.empty() ? "run.overlay" : out_path + ".overlay",
                   art.overlay_dump);
      if (!art.result.ok) {
        std::cerr << "epoch-abort phase=" << art.result.abort_phase
                  << " detail=" << art.result.abort_detail << "\n";
        return 2;
      }
      return 0;
    }

    if (sweep_cmd->parsed()) {
      auto rows = exp::sweep_scaling(sweep_ns, config);
      std::string csv = exp::csv_header() + "\n";
      for (const auto& row : rows) csv += exp::to_csv(row) + "\n";
      emit(out_path, csv);
      return 0;
    }

    if (mc_cmd->parsed()) {
      auto res = exp::montecarlo_partition(mc_n, mc_tau, mc_s,
                                           trials ? trials : 1000, config.seed);
      std::ostringstream os;
      os << "n,tau,s,trials,malicious,frequency,exact_union_lower,std_error\n"
         << res.n << ',' << mc_tau << ',' << res.s << ',' << res.trials << ','
         << res.malicious << ',' << res.frequency << ',' << res.exact_union_lower << ','
         << res.std_error << "\n";
      emit(out_path, os.str());
      return 0;
    }

    if (lb_cmd->parsed()) {
      lb.seed = config.seed;
      if (trials) lb.trials = trials;
      auto res = exp::lowerbound_demo(lb);
      std::ostringstream os;
      os << "n,epsilon,omega_plus,trials,surrounded_frequency,surrounded_any,"
            "mean_disjoint_sets,closed_form,std_error\n"
         << lb.n << ',' << lb.epsilon << ',' << lb.omega_plus << ',' << res.trials << ','
         << res.surrounded_frequency << ',' << res.surrounded_any_frequency << ','
         << res.mean_disjoint_sets << ',' << res.closed_form << ',' << res.std_error
         << "\n";
      emit(out_path, os.str());
      return 0;
    }

    if (dump_cmd->parsed()) {
      auto art = exp::run_once(config, false, true);
      emit(out_path, art.overlay_dump);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
