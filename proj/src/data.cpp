#include "isingmix/data.hpp"

#include "isingmix/model.hpp"
#include "isingmix/rng.hpp"

#include <sstream>

namespace isingmix {

namespace {

// Whittaker (1990) Rochdale table, 2^8 cells, variable 8 fastest.
constexpr double kRochdale[256] = {
    5,  0, 2,  1, 5,  1, 0, 0, 4,  1,  0, 0, 6,  0,  2, 0,  //
    8,  0, 11, 0, 13, 0, 1, 0, 3,  0,  1, 0, 26, 0,  1, 0,  //
    5,  0, 2,  0, 0,  0, 0, 0, 0,  0,  0, 0, 0,  0,  1, 0,  //
    4,  0, 8,  2, 6,  0, 1, 0, 1,  0,  1, 0, 0,  0,  1, 0,  //
    17, 10, 1, 1, 16, 7, 0, 0, 0,  2,  0, 0, 10, 6,  0, 0,  //
    1,  0, 2,  0, 0,  0, 0, 0, 1,  0,  0, 0, 0,  0,  0, 0,  //
    4,  7, 3,  1, 1,  1, 2, 0, 1,  0,  0, 0, 1,  0,  0, 0,  //
    0,  0, 3,  0, 0,  0, 0, 0, 0,  0,  0, 0, 0,  0,  0, 0,  //
    18, 3, 2,  0, 23, 4, 0, 0, 22, 2,  0, 0, 57, 3,  0, 0,  //
    5,  1, 0,  0, 11, 0, 1, 0, 11, 0,  0, 0, 29, 2,  1, 1,  //
    3,  0, 0,  0, 4,  0, 0, 0, 1,  0,  0, 0, 0,  0,  0, 0,  //
    1,  1, 0,  0, 0,  0, 0, 0, 0,  0,  0, 0, 0,  0,  0, 0,  //
    41, 25, 0, 1, 37, 26, 0, 0, 15, 10, 0, 0, 43, 22, 0, 0,  //
    0,  0, 0,  0, 2,  0, 0, 0, 0,  0,  0, 0, 3,  0,  0, 0,  //
    2,  4, 0,  0, 2,  1, 0, 0, 0,  1,  0, 0, 2,  1,  0, 0,  //
    0,  0, 0,  0, 0,  0, 0, 0, 0,  0,  0, 0, 0,  0,  0, 0};

// NLTCS eight-variable functional-disability table, four pooled survey waves.
constexpr double kNltcs[256] = {
    4419, 97,  67, 472, 2063, 55, 335, 44,  313, 18, 33,  76, 1,   5,   2,   6,     //
    119, 115, 1,  16,  0,    4,  1189, 17, 112, 6,  130, 64, 529, 52,  453, 56,    //
    2,   22,  13, 116, 10,   67, 47,  0,   2,   0,  1,   92, 0,   4,   0,   4,     //
    1,   12,  5,  19,  1,    0,  0,   3,   1,   0,  354, 2,  27,  4,   16,  5,     //
    55,  3,   24, 1,   0,    0,  1,   7,   1,   60, 667, 29, 601, 14,  1,   16,    //
    3,   55,  8,  85,  7,    65, 69,  400, 24,  5,  62,  2,  10,  164, 0,   8,     //
    2,   6,   3,  15,  3,    5,  0,   0,   0,   0,  0,   0,  3,   32,  4,   41,    //
    1,   0,   1,  0,   1,    0,  4,   1,   3,   3,  9,   0,  0,   0,   0,   0,     //
    14,  226, 11, 140, 5,    0,  2,   2,   10,  0,  7,   3,  3,   11,  31,  3,     //
    0,   4,   0,  2,   125,  8,  134, 81,  654, 34, 0,   34, 1,   5,   25,  215,   //
    8,   80,  30, 5,   105,  19, 50,  1,   1,   0,  2,   3,  0,   3,   0,   3,     //
    13,  9,   4,  1,   0,    0,  4,   7,   1,   6,  6,   54, 3,   0,   1,   0,     //
    0,   1,   6,  0,   6,    1,  42,  3,   28,  48, 207, 12, 0,   5,   0,   2,     //
    4,   34,  1,  13,  6,    38, 549, 19,  180, 21, 196, 27, 2,   14,  72,  88,    //
    8,   3,   0,  0,   2,    8,  11,  3,   15,  9,  5,   19, 3,   26,  0,   28,    //
    29,  158, 10, 89,  5,    66, 764, 66,  86,  8,  175, 7,  151, 131, 516, 1056};

long reverse_bits(long cell, int d) {
  long out = 0;
  for (int v = 0; v < d; ++v)
    if ((cell >> v) & 1) out |= 1L << (d - 1 - v);
  return out;
}

}  // namespace

BinaryTable parse_table(const std::string& text, int d, CellOrder order) {
  if (d < 1 || d > 20) throw std::invalid_argument("parse_table: d must be in [1,20]");
  std::istringstream in(text);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("parse_table: non-numeric token '" + tok + "'");
      }
      if (used != tok.size()) throw std::invalid_argument("parse_table: non-numeric token '" + tok + "'");
      if (v < 0) throw std::invalid_argument("parse_table: negative count");
      values.push_back(v);
    }
  }
  const long n = num_cells(d);
  if (static_cast<long>(values.size()) != n)
    throw std::invalid_argument("parse_table: expected " + std::to_string(n) + " counts, got " +
                                std::to_string(values.size()));
  Vector counts(n);
  for (long i = 0; i < n; ++i) {
    const long dst = order == CellOrder::last_fastest ? i : reverse_bits(i, d);
    counts(dst) = values[i];
  }
  return BinaryTable(d, counts);
}

std::string serialize_table(const BinaryTable& table) {
  std::ostringstream out;
  const long n = num_cells(table.d);
  const long per_line = 1L << ((table.d + 1) / 2);
  out.precision(17);
  for (long i = 0; i < n; ++i) {
    const double v = table.counts(i);
    if (v == static_cast<long long>(v))
      out << static_cast<long long>(v);
    else
      out << v;
    out << ((i + 1) % per_line == 0 ? '\n' : ' ');
  }
  return out.str();
}

BinaryTable builtin_dataset(const std::string& name) {
  const double* raw = nullptr;
  double checksum_total = 0;
  int checksum_zeros = -1;
  if (name == "rochdale") {
    raw = kRochdale;
    checksum_total = 665;
    checksum_zeros = 165;
  } else if (name == "nltcs") {
    raw = kNltcs;
    checksum_total = 21574;
  } else {
    throw std::invalid_argument("builtin_dataset: unknown dataset '" + name + "'");
  }
  Vector counts = Eigen::Map<const Vector>(raw, 256);
  BinaryTable table(8, counts);
  if (table.total() != checksum_total) throw std::logic_error("builtin_dataset: checksum failure (total)");
  if (checksum_zeros >= 0 && (counts.array() == 0).count() != checksum_zeros)
    throw std::logic_error("builtin_dataset: checksum failure (zero cells)");
  return table;
}

SimulatedDesign simulate_design(char name, long N, bool sampled, std::uint64_t rng_seed) {
  if (N < 1) throw std::invalid_argument("simulate_design: N must be >= 1");
  const int d = 6;
  Vector mains(d);
  mains << 1, -1, 1, -1, 1, -1;

  auto ising = [&](std::initializer_list<std::pair<std::pair<int, int>, double>> pairs) {
    IsingParams t(d);
    t.main = mains;
    for (const auto& pr : pairs) t.inter(pair_index(d, pr.first.first - 1, pr.first.second - 1)) = pr.second;
    return t;
  };

  MixtureParams truth;
  switch (name) {
    case 'A':
      truth = MixtureParams::single(ising({{{1, 2}, 1}, {{1, 3}, -1}, {{1, 4}, 1}, {{2, 3}, -1}}));
      break;
    case 'B':
      truth = MixtureParams::single(ising({{{1, 2}, 1}, {{1, 3}, -0.5}, {{1, 4}, 0.2}, {{2, 3}, -0.1}}));
      break;
    case 'C': {
      Vector w(2);
      w << 0.4, 0.6;
      truth = MixtureParams(w, {ising({{{1, 2}, 1}, {{1, 3}, -1}}), ising({{{4, 6}, 1}, {{5, 6}, -1}})}, true);
      break;
    }
    case 'D': {
      Vector w(2);
      w << 0.4, 0.6;
      truth = MixtureParams(w, {ising({{{1, 2}, 1}, {{1, 3}, -1}, {{2, 3}, 1}}), ising({{{1, 4}, 1}, {{1, 5}, -1}})},
                            true);
      break;
    }
    default:
      throw std::invalid_argument("simulate_design: unknown design (use A, B, C or D)");
  }

  const Vector p = mixture_cell_probabilities(truth);
  SimulatedDesign out;
  out.truth = truth;
  if (sampled) {
    RngEngine rng = make_stream(rng_seed, 0);
    out.table = BinaryTable(d, sample_multinomial(N, p, rng));
  } else {
    out.table = BinaryTable(d, static_cast<double>(N) * p);
  }
  return out;
}

}  // namespace isingmix
