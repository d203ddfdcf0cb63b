#include "isingmix/cli.hpp"

#include "isingmix/data.hpp"
#include "isingmix/identifiability.hpp"
#include "isingmix/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace isingmix {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct DataArgs {
  std::string data;
  int d = 8;
  std::string order = "last";
};

BinaryTable load_table(const DataArgs& a) {
  if (a.data == "rochdale" || a.data == "nltcs") return builtin_dataset(a.data);
  return parse_table(read_file(a.data), a.d,
                     a.order == "first" ? CellOrder::first_fastest : CellOrder::last_fastest);
}

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "dataset name (rochdale|nltcs) or table file")->required();
  cmd->add_option("--d", a.d, "number of binary variables (table files only)");
  cmd->add_option("--order", a.order, "cell order of the input file: last|first (variable d or 1 fastest)")
      ->check(CLI::IsMember({"last", "first"}));
}

struct FitArgs {
  DataArgs data;
  int K = 1;
  bool shared_main = false;
  double sigma0 = 0.1, sigma1 = 1.0, beta = 0.5;
  std::vector<double> alpha;
  long M = 100000;
  int R = 1, J = 5;
  std::uint64_t seed = 1;
  double tau = 0.5;
  std::string out = "report.json";
  std::string dot_prefix;
};

int cmd_fit(const FitArgs& a) {
  const BinaryTable table = load_table(a.data);
  PriorConfig prior;
  prior.sigma0 = a.sigma0;
  prior.sigma1 = a.sigma1;
  prior.beta = a.beta;
  if (!a.alpha.empty()) prior.alpha = Eigen::Map<const Vector>(a.alpha.data(), a.alpha.size());
  prior.validate();

  AnalysisReport rep;
  rep.source = a.data.data;
  rep.d = table.d;
  rep.N = table.total();
  rep.K = a.K;
  rep.shared_main = a.shared_main;
  rep.prior = prior;
  rep.J = a.J;
  rep.M = a.M;
  rep.R = a.R;
  rep.seed = a.seed;
  rep.tau = a.tau;

  if (a.K == 1)
    rep.posterior = posterior_gamma_ising(table, prior, a.M, a.seed, a.R);
  else
    rep.posterior = posterior_mixture(table, prior, a.K, a.shared_main, a.J, a.M, a.R, a.seed);

  const LocalOptimum ising_mle = fit_mle(table, ModelSpec{1, true});
  rep.gof_ising = gof_test(table, ising_mle);
  if (a.K >= 2) {
    const LocalOptimum mix_mle = fit_mle(table, ModelSpec{a.K, a.shared_main});
    rep.gof_mixture = gof_test(table, mix_mle);
    rep.lrt = lrt_test(table, ising_mle, mix_mle);
    rep.expected_counts = expected_count_rows(table, &ising_mle, &mix_mle);
  } else {
    rep.expected_counts = expected_count_rows(table, &ising_mle, nullptr);
  }

  write_file(a.out, rep.to_json().dump(2) + "\n");
  if (!a.dot_prefix.empty()) {
    for (int k = 0; k < rep.posterior->K; ++k)
      write_file(a.dot_prefix + "_component" + std::to_string(k + 1) + ".dot",
                 export_graph(*rep.posterior, k, a.tau));
  }
  return 0;
}

struct SimArgs {
  std::string design = "A";
  long N = 10000;
  bool sampled = false;
  std::uint64_t seed = 1;
  std::string out = "table.txt";
};

int cmd_simulate(const SimArgs& a) {
  const SimulatedDesign sim = simulate_design(a.design.at(0), a.N, a.sampled, a.seed);
  write_file(a.out, serialize_table(sim.table));
  return 0;
}

struct GofArgs {
  DataArgs data;
  int K = 2;
  bool shared_main = false;
  std::string out = "gof.json";
};

int cmd_gof(const GofArgs& a) {
  const BinaryTable table = load_table(a.data);
  AnalysisReport rep;
  rep.source = a.data.data;
  rep.d = table.d;
  rep.N = table.total();
  rep.K = a.K;
  rep.shared_main = a.shared_main;

  const LocalOptimum ising_mle = fit_mle(table, ModelSpec{1, true});
  rep.gof_ising = gof_test(table, ising_mle);
  if (a.K >= 2) {
    const LocalOptimum mix_mle = fit_mle(table, ModelSpec{a.K, a.shared_main});
    rep.gof_mixture = gof_test(table, mix_mle);
    rep.lrt = lrt_test(table, ising_mle, mix_mle);
    rep.expected_counts = expected_count_rows(table, &ising_mle, &mix_mle);
  } else {
    rep.expected_counts = expected_count_rows(table, &ising_mle, nullptr);
  }
  write_file(a.out, rep.to_json().dump(2) + "\n");
  return 0;
}

// ----- identifiability: model + mask from a JSON spec ------------------------

Vector json_vector(const Json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

std::vector<bool> json_bools(const Json& j) {
  std::vector<bool> v;
  for (const auto& x : j) v.push_back(x.get<bool>());
  return v;
}

struct IdentSpec {
  MixtureParams params;
  ParameterMask mask;
};

IdentSpec parse_ident_spec(const Json& j) {
  const int d = j.at("d").get<int>();
  const int K = j.at("K").get<int>();
  const int p = num_pairs(d);
  const bool shared = j.value("shared_main", true);

  Vector weights = j.contains("weights") ? json_vector(j.at("weights")) : Vector::Constant(K, 1.0 / K);
  std::vector<IsingParams> comps;
  for (int k = 0; k < K; ++k) {
    IsingParams c(d);
    if (j.contains("main")) c.main = json_vector(j.at("main"));
    if (j.contains("mains")) c.main = json_vector(j.at("mains").at(k));
    if (j.contains("inter")) c.inter = json_vector(j.at("inter").at(k));
    if (c.inter.size() != p) throw std::invalid_argument("identifiability spec: inter row length != d(d-1)/2");
    comps.push_back(std::move(c));
  }
  IdentSpec out;
  out.params = MixtureParams(weights, comps, shared);

  if (j.contains("mask")) {
    const Json& m = j.at("mask");
    out.mask.free_weights = m.value("free_weights", false);
    out.mask.free_main = m.contains("free_main") ? json_bools(m.at("free_main")) : std::vector<bool>(d, false);
    out.mask.free_inter.clear();
    for (const auto& row : m.at("free_inter")) out.mask.free_inter.push_back(json_bools(row));
  } else {
    out.mask = ParameterMask::all_free(d, K, K > 1);
  }
  return out;
}

bool is_zero(double x) { return std::abs(x) <= 1e-12; }

int cmd_identifiability(const std::string& spec_path, const std::string& out_path) {
  const Json spec = Json::parse(read_file(spec_path));
  IdentSpec s = parse_ident_spec(spec);
  const int d = s.params.d(), K = s.params.K, p = num_pairs(d);

  const IdentifiabilityResult rank = local_identifiability_test(s.params, s.mask);
  const AssumptionReport assume = check_assumptions(s.params, s.mask);

  Json out;
  out["d"] = d;
  out["K"] = K;
  out["free_parameters"] = s.mask.count(K);
  Json ev = Json::array();
  for (long i = 0; i < rank.eigenvalues.size(); ++i) ev.push_back(rank.eigenvalues(i));
  out["eigenvalues"] = std::move(ev);
  out["locally_identifiable_at_point"] = rank.identifiable_at_point;
  out["assumptions"] = Json{{"a1_shared_main", assume.a1_shared_main},
                            {"a2_one_unknown_component", assume.a2_one_unknown_component},
                            {"a3_fixed_weights", assume.a3_fixed_weights},
                            {"a4_disjoint_activation", assume.a4_disjoint_activation},
                            {"prop1_applies", assume.prop1_applies},
                            {"prop2_applies", assume.prop2_applies}};

  // Constructive counterexample families, when the configuration matches.
  const bool zero_mains = [&] {
    for (const auto& c : s.params.components)
      if (c.main.lpNorm<Eigen::Infinity>() > 1e-12) return false;
    return true;
  }();
  auto run_family = [&](const std::string& name, auto&& apply) {
    Json fam;
    fam["name"] = name;
    double worst = 0.0;
    Json grid = Json::array();
    for (double w_alt = 0.1; w_alt < 0.95; w_alt += 0.1) {
      const double diff = apply(w_alt);
      worst = std::max(worst, diff);
      grid.push_back(Json{{"w_alt", w_alt}, {"max_cell_probability_difference", diff}});
    }
    fam["grid"] = std::move(grid);
    fam["max_cell_probability_difference"] = worst;
    out["counterexample_family"] = std::move(fam);
  };

  if (d == 2 && K == 2 && zero_mains && is_zero(s.params.components[1].inter(0)) && s.mask.free_weights) {
    const double th = s.params.components[0].inter(0), w = s.params.weights(0);
    run_family("example2_d2", [&](double w_alt) {
      const FamilyAlternative alt = family_example2(th, w, w_alt);
      return verify_equal_distribution(example2_mixture(th, w), example2_mixture(alt.theta12_alt, alt.w_alt));
    });
  } else if (d == 4 && K == 2 && zero_mains && s.mask.free_weights) {
    const int i12 = pair_index(4, 0, 1), i34 = pair_index(4, 2, 3);
    bool shape = true;
    for (int j = 0; j < p; ++j) {
      if (j != i12 && !is_zero(s.params.components[0].inter(j))) shape = false;
      if (j != i34 && !is_zero(s.params.components[1].inter(j))) shape = false;
    }
    if (shape) {
      const double t12 = s.params.components[0].inter(i12), t34 = s.params.components[1].inter(i34);
      const double w = s.params.weights(0);
      run_family("example4_d4", [&](double w_alt) {
        const FamilyAlternative alt = family_example4(t12, t34, w, w_alt);
        return verify_equal_distribution(example4_mixture(t12, t34, w),
                                         example4_mixture(alt.theta12_alt, alt.theta34_alt, alt.w_alt));
      });
    }
  }

  write_file(out_path, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Bayesian Ising mixture analysis of binary contingency tables"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* cfit = app.add_subcommand("fit", "fit a Bayesian Ising (mixture) model and report posterior means");
  add_data_options(cfit, fit.data);
  cfit->add_option("--K", fit.K, "number of mixture components")->check(CLI::PositiveNumber);
  cfit->add_flag("--shared-main", fit.shared_main, "identical main effects across components");
  cfit->add_option("--sigma0", fit.sigma0, "spike standard deviation");
  cfit->add_option("--sigma1", fit.sigma1, "slab standard deviation");
  cfit->add_option("--beta", fit.beta, "prior inclusion probability");
  cfit->add_option("--alpha", fit.alpha, "Dirichlet parameters (K values)");
  cfit->add_option("--M", fit.M, "importance samples per replicate");
  cfit->add_option("--R", fit.R, "independent replicates");
  cfit->add_option("--J", fit.J, "multi-start runs for the proposal");
  cfit->add_option("--seed", fit.seed, "random seed");
  cfit->add_option("--tau", fit.tau, "significance threshold on posterior means");
  cfit->add_option("--out", fit.out, "report JSON path");
  cfit->add_option("--dot", fit.dot_prefix, "write DOT graphs with this path prefix");

  SimArgs sim;
  CLI::App* csim = app.add_subcommand("simulate", "write a table from one of the reference designs");
  csim->add_option("--design", sim.design, "design name: A|B|C|D")->check(CLI::IsMember({"A", "B", "C", "D"}));
  csim->add_option("--N", sim.N, "sample size");
  csim->add_flag("--sampled", sim.sampled, "draw Multinomial(N,p) instead of the fixed table N*p");
  csim->add_option("--seed", sim.seed, "random seed");
  csim->add_option("--out", sim.out, "output table path");

  std::string ident_spec, ident_out = "identifiability.json";
  CLI::App* cident = app.add_subcommand("identifiability", "Fisher-information rank and assumption checks");
  cident->add_option("--spec", ident_spec, "model+mask JSON spec")->required();
  cident->add_option("--out", ident_out, "report JSON path");

  GofArgs gof;
  CLI::App* cgof = app.add_subcommand("gof", "maximum-likelihood goodness-of-fit and LRT");
  add_data_options(cgof, gof.data);
  cgof->add_option("--K", gof.K, "number of mixture components")->check(CLI::PositiveNumber);
  cgof->add_flag("--shared-main", gof.shared_main, "identical main effects across components");
  cgof->add_option("--out", gof.out, "report JSON path");

  std::vector<const char*> argv;
  argv.push_back("isingmix");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cfit->parsed()) return cmd_fit(fit);
    if (csim->parsed()) return cmd_simulate(sim);
    if (cident->parsed()) return cmd_identifiability(ident_spec, ident_out);
    if (cgof->parsed()) return cmd_gof(gof);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace isingmix
