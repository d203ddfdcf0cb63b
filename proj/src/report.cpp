#include "isingmix/report.hpp"

#include "isingmix/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace isingmix {

std::string cell_label(long cell, int d) {
  std::string s(d, '0');
  for (int v = 0; v < d; ++v)
    if (cell_bit(cell, v, d)) s[v] = '1';
  return s;
}

std::vector<std::pair<int, int>> significant_edges(const PosteriorSummary& summary, int component, double tau) {
  if (component < 0 || component >= summary.K) throw std::invalid_argument("significant_edges: bad component");
  if (!(tau > 0 && tau < 1)) throw std::invalid_argument("significant_edges: tau must be in (0,1)");
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < num_pairs(summary.d); ++j)
    if (summary.gamma_mean(component, j) > tau) {
      const auto [a, b] = pair_from_index(summary.d, j);
      out.push_back({a + 1, b + 1});
    }
  return out;
}

std::string export_graph(const PosteriorSummary& summary, int component, double tau) {
  if (component < 0 || component >= summary.K) throw std::invalid_argument("export_graph: bad component");
  if (!(tau > 0 && tau < 1)) throw std::invalid_argument("export_graph: tau must be in (0,1)");
  std::ostringstream out;
  out << "graph {\n";
  for (int v = 1; v <= summary.d; ++v) out << "  " << v << ";\n";
  char label[16];
  for (int j = 0; j < num_pairs(summary.d); ++j) {
    const double g = summary.gamma_mean(component, j);
    if (g > tau) {
      const auto [a, b] = pair_from_index(summary.d, j);
      std::snprintf(label, sizeof label, "%.2f", g);
      out << "  " << (a + 1) << " -- " << (b + 1) << " [label=\"" << label << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::vector<AnalysisReport::ExpectedCountRow> expected_count_rows(const BinaryTable& table,
                                                                  const LocalOptimum* ising_fit,
                                                                  const LocalOptimum* mixture_fit) {
  const long n = num_cells(table.d);
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return table.counts(a) > table.counts(b); });

  Vector e_ising, e_mix;
  if (ising_fit) e_ising = table.total() * mixture_cell_probabilities(ising_fit->params);
  if (mixture_fit) e_mix = table.total() * mixture_cell_probabilities(mixture_fit->params);

  std::vector<AnalysisReport::ExpectedCountRow> rows;
  for (long r = 0; r < std::min<long>(10, n); ++r) {
    AnalysisReport::ExpectedCountRow row;
    row.cell = cell_label(order[r], table.d);
    row.observed = table.counts(order[r]);
    if (ising_fit) row.ising = e_ising(order[r]);
    if (mixture_fit) row.mixture = e_mix(order[r]);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json gof_to_json(const GofResult& g) {
  return Json{{"deviance", g.deviance},
              {"pearson", g.pearson},
              {"df_model", g.df_model},
              {"df_saturated", g.df_saturated},
              {"p_deviance_model", g.p_deviance_model},
              {"p_pearson_model", g.p_pearson_model},
              {"p_value", g.p_value},
              {"convention", "pearson_vs_saturated_df"},
              {"infinite", g.infinite}};
}

}  // namespace

Json AnalysisReport::to_json() const {
  Json j;
  j["input"] = {{"source", source}, {"d", d}, {"N", N}};
  j["settings"] = {{"K", K},
                   {"shared_main", shared_main},
                   {"J", J},
                   {"M", M},
                   {"R", R},
                   {"seed", seed},
                   {"tau", tau},
                   {"prior", Json{{"sigma0", prior.sigma0},
                                  {"sigma1", prior.sigma1},
                                  {"beta", prior.beta},
                                  {"alpha", vector_to_json(prior.alpha_or_flat(K))}}}};
  if (posterior) {
    const PosteriorSummary& s = *posterior;
    Json edges = Json::array();
    for (int k = 0; k < s.K; ++k) {
      Json comp = Json::array();
      for (const auto& [a, b] : significant_edges(s, k, tau)) {
        comp.push_back(Json{{"pair", Json::array({a, b})},
                            {"mean", s.gamma_mean(k, pair_index(s.d, a - 1, b - 1))}});
      }
      edges.push_back(std::move(comp));
    }
    j["posterior"] = {{"gamma_mean", matrix_to_json(s.gamma_mean)},
                      {"gamma_se", matrix_to_json(s.gamma_se)},
                      {"weight_mean", vector_to_json(s.weight_mean)},
                      {"weight_se", vector_to_json(s.weight_se)},
                      {"ess", vector_to_json(s.ess)},
                      {"degenerate", s.degenerate}};
    j["significant_edges"] = std::move(edges);
  }
  if (gof_ising) j["gof_ising"] = gof_to_json(*gof_ising);
  if (gof_mixture) j["gof_mixture"] = gof_to_json(*gof_mixture);
  if (lrt)
    j["lrt"] = Json{{"statistic", lrt->statistic},
                    {"df", lrt->df},
                    {"p_value", lrt->p_value},
                    {"negative", lrt->negative},
                    {"note", "chi-square approximation; mixture null lies on the boundary"}};
  if (!expected_counts.empty()) {
    Json rows = Json::array();
    for (const auto& r : expected_counts) {
      Json row{{"cell", r.cell}, {"observed", r.observed}};
      if (r.ising) row["ising"] = *r.ising;
      if (r.mixture) row["mixture"] = *r.mixture;
      rows.push_back(std::move(row));
    }
    j["expected_counts_top10"] = std::move(rows);
  }
  return j;
}

}  // namespace isingmix
