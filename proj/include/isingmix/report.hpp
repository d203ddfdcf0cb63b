#pragma once

#include "isingmix/gof.hpp"
#include "isingmix/sampler.hpp"

#include <optional>
#include <string>

// vendored single-header nlohmann/json
#include <json.hpp>

namespace isingmix {

using Json = nlohmann::json;

/// The structured result of one analysis run: input descriptor, settings,
/// posterior summary, thresholded edge sets, GOF/LRT results and fitted
/// expected counts for the ten largest observed cells. Serializes to a
/// stable JSON document (same inputs and seed give byte-identical output).
struct AnalysisReport {
  std::string source;  // dataset name or file path
  int d = 0;
  double N = 0;
  int K = 1;
  bool shared_main = false;
  PriorConfig prior;
  int J = 5;
  long M = 100000;
  int R = 1;
  std::uint64_t seed = 0;
  double tau = 0.5;

  std::optional<PosteriorSummary> posterior;
  std::optional<GofResult> gof_ising;
  std::optional<GofResult> gof_mixture;
  std::optional<LrtResult> lrt;

  // top-10 expected counts: (cell bit string, observed, per-model fitted)
  struct ExpectedCountRow {
    std::string cell;
    double observed = 0;
    std::optional<double> ising;
    std::optional<double> mixture;
  };
  std::vector<ExpectedCountRow> expected_counts;

  Json to_json() const;
};

/// Pairs with gamma_mean > tau for one component, in pair order.
std::vector<std::pair<int, int>> significant_edges(const PosteriorSummary& summary, int component, double tau);

/// Graphviz DOT rendering of one component's significant associations:
/// undirected, d numbered vertices, edge labels are posterior means to two
/// decimals, deterministic ordering.
std::string export_graph(const PosteriorSummary& summary, int component, double tau);

/// Bit-string label of a cell in canonical order ("10001100" style).
std::string cell_label(long cell, int d);

/// Rows of the expected-count comparison for the ten largest observed cells.
std::vector<AnalysisReport::ExpectedCountRow> expected_count_rows(const BinaryTable& table,
                                                                  const LocalOptimum* ising_fit,
                                                                  const LocalOptimum* mixture_fit);

}  // namespace isingmix
