#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rleceo/cop.hpp"
#include "rleceo/error.hpp"
#include "rleceo/random.hpp"

namespace rleceo {

inline constexpr double kSearchRange = 100.0;
inline constexpr double kDefaultShiftRange = 50.0;

struct ShiftSpec {
  std::vector<double> o;
  double range = kSearchRange;

  ShiftSpec() = default;
  explicit ShiftSpec(std::vector<double> shift, double search_range = kSearchRange)
      : o(std::move(shift)), range(search_range) {
    for (double v : o) {
      if (!std::isfinite(v) || !(std::abs(v) < range)) {
        throw ContractError("shift component must lie strictly inside the search range");
      }
    }
  }
};

namespace detail {

inline std::vector<double> shifted(std::span<const double> x, const std::vector<double>& o) {
  if (x.size() != o.size()) throw ContractError("shift length does not match candidate length");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - o[i];
  return y;
}

inline double sum_squares(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

inline double rastrigin(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v) + 10.0;
  return s;
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Rastrigin objective restricted to the sphere sum(y^2) = 4 with sum|y| >= 4.
inline Evaluation cec12(std::span<const double> x, const ShiftSpec& shift) {
  const auto y = detail::shifted(x, shift.o);
  double abs_sum = 0.0;
  for (double v : y) abs_sum += std::abs(v);
  return Evaluation{detail::rastrigin(y), {4.0 - abs_sum}, {detail::sum_squares(y) - 4.0}};
}

// Max-abs objective; the equality cos(f) + sin(f) = 0 cuts the space into
// nested hypercube shells.
inline Evaluation cec14(std::span<const double> x, const ShiftSpec& shift) {
  const auto y = detail::shifted(x, shift.o);
  double f = 0.0;
  for (double v : y) f = std::max(f, std::abs(v));
  const double d = static_cast<double>(y.size());
  return Evaluation{f, {detail::sum_squares(y) - 100.0 * d}, {std::cos(f) + std::sin(f)}};
}

// Shift drawn uniformly from [-50, 50]^D, seeded by the problem name.
inline std::vector<double> default_shift(std::string_view name, std::size_t dim) {
  Rng rng(mix_seed(hash_name(name), dim));
  return detail::uniform_vector(rng, dim, -kDefaultShiftRange, kDefaultShiftRange);
}

inline ConstrainedProblem make_cec12(std::size_t dim, ShiftSpec shift) {
  if (shift.o.size() != dim) throw ContractError("cec12: shift length does not match dimension");
  std::optional<std::vector<double>> certified;
  if (dim >= 4) {
    std::vector<double> x = shift.o;
    for (std::size_t i = 0; i < 4; ++i) x[i] += 1.0;
    certified = std::move(x);
  }
  return ConstrainedProblem(
      "cec12", std::vector<double>(dim, -kSearchRange), std::vector<double>(dim, kSearchRange), 1, 1,
      [s = std::move(shift)](std::span<const double> x) { return cec12(x, s); }, std::move(certified));
}

inline ConstrainedProblem make_cec14(std::size_t dim, ShiftSpec shift) {
  if (shift.o.size() != dim) throw ContractError("cec14: shift length does not match dimension");
  // max|y| = 3*pi/4 puts cos + sin at zero up to rounding.
  std::vector<double> x = shift.o;
  x[0] += 0.75 * std::numbers::pi;
  return ConstrainedProblem(
      "cec14", std::vector<double>(dim, -kSearchRange), std::vector<double>(dim, kSearchRange), 1, 1,
      [s = std::move(shift)](std::span<const double> x) { return cec14(x, s); }, std::move(x));
}

inline ConstrainedProblem make_sphere(std::size_t dim, ShiftSpec shift) {
  if (shift.o.size() != dim) throw ContractError("sphere: shift length does not match dimension");
  std::vector<double> certified = shift.o;
  return ConstrainedProblem(
      "sphere", std::vector<double>(dim, -kSearchRange), std::vector<double>(dim, kSearchRange), 0, 0,
      [s = std::move(shift)](std::span<const double> x) {
        return Evaluation{detail::sum_squares(detail::shifted(x, s.o)), {}, {}};
      },
      std::move(certified));
}

// ---------------------------------------------------------------------------
// Synthetic constrained families. Each instance carries a certified feasible
// point: inequalities hold there with a positive margin, and equalities are
// anchored so they evaluate to exactly zero at that point.

inline const std::vector<std::string>& synthetic_kinds() {
  static const std::vector<std::string> kinds = {"sphere-linear",    "rosenbrock-cubic", "rastrigin-ring",
                                                 "ackley-ellipsoid", "griewank-plane",   "schwefel-band"};
  return kinds;
}

// `shift_override`, when non-empty, replaces the seeded shift; the remaining
// seeded draws are unchanged.
inline ConstrainedProblem synthetic_family(std::uint64_t seed, std::size_t dim, const std::string& kind,
                                           std::vector<double> shift_override = {}) {
  const auto& kinds = synthetic_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw ContractError("unknown synthetic kind '" + kind + "'");
  }
  if (dim == 0) throw ContractError("synthetic: dimension must be positive");

  const std::string name = "synthetic/" + kind + "/" + std::to_string(seed);
  Rng rng(mix_seed(hash_name("synthetic/" + kind), seed, dim));
  std::vector<double> o = detail::uniform_vector(rng, dim, -kDefaultShiftRange, kDefaultShiftRange);
  if (!shift_override.empty()) o = ShiftSpec(std::move(shift_override)).o;
  if (o.size() != dim) throw ContractError("synthetic: shift length does not match dimension");
  const double n = static_cast<double>(dim);

  std::vector<double> yc(dim, 0.0);
  std::size_t p = 0;
  std::size_t q = 0;
  Evaluator raw;

  if (kind == "sphere-linear") {
    // f = sum y^2, g1 = 1 - sum y.
    yc[0] = 2.0;
    p = 1;
    raw = [](std::span<const double> y) {
      double s = 0.0;
      for (double v : y) s += v;
      return Evaluation{detail::sum_squares(y), {1.0 - s}, {}};
    };
  } else if (kind == "rosenbrock-cubic") {
    const double c1 = rng.uniform(0.5, 2.0);
    const double radius = rng.uniform(50.0, 80.0);
    yc[0] = 20.0 * std::cbrt(2.0 * c1);
    p = 2;
    raw = [c1, radius](std::span<const double> y) {
      double f = 0.0;
      for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double zi = 0.02 * y[i] + 1.0;
        const double zn = 0.02 * y[i + 1] + 1.0;
        f += 100.0 * (zn - zi * zi) * (zn - zi * zi) + (1.0 - zi) * (1.0 - zi);
      }
      double cubes = 0.0;
      for (double v : y) cubes += (v / 20.0) * (v / 20.0) * (v / 20.0);
      return Evaluation{f, {c1 - cubes, detail::sum_squares(y) - radius * radius}, {}};
    };
  } else if (kind == "rastrigin-ring") {
    const double rho = rng.uniform(3.0, 10.0);
    yc[0] = rho;
    p = 1;
    q = 1;
    raw = [rho](std::span<const double> y) {
      double abs_sum = 0.0;
      for (double v : y) abs_sum += std::abs(v);
      return Evaluation{detail::rastrigin(y), {0.5 * rho - abs_sum}, {detail::sum_squares(y)}};
    };
  } else if (kind == "ackley-ellipsoid") {
    std::vector<double> axes = detail::uniform_vector(rng, dim, 5.0, 20.0);
    yc[0] = axes[0];
    p = 1;
    q = 1;
    raw = [axes, n](std::span<const double> y) {
      double sq = 0.0;
      double cs = 0.0;
      double ell = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        sq += y[i] * y[i];
        cs += std::cos(2.0 * std::numbers::pi * y[i]);
        ell += (y[i] / axes[i]) * (y[i] / axes[i]);
      }
      const double f = -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
      return Evaluation{f, {-y[0]}, {ell}};
    };
  } else if (kind == "griewank-plane") {
    yc = detail::uniform_vector(rng, dim, -20.0, 20.0);
    std::vector<double> w1 = detail::uniform_vector(rng, dim, -1.0, 1.0);
    std::vector<double> w2 = detail::uniform_vector(rng, dim, -1.0, 1.0);
    const double s = rng.uniform(25.0, 40.0);
    const double margin = rng.uniform(1.0, 5.0);
    const double b2 = detail::dot(w2, yc) + margin;
    p = 2;
    q = 1;
    raw = [w1, w2, s, b2, n](std::span<const double> y) {
      double prod = 1.0;
      for (std::size_t i = 0; i < y.size(); ++i) prod *= std::cos(y[i] / std::sqrt(static_cast<double>(i + 1)));
      const double f = detail::sum_squares(y) / 4000.0 - prod + 1.0;
      return Evaluation{f, {detail::sum_squares(y) / n - s * s, detail::dot(w2, y) - b2}, {detail::dot(w1, y)}};
    };
  } else {  // schwefel-band
    const double c = rng.uniform(5.0, 15.0);
    const double width = rng.uniform(0.5, 2.0);
    std::fill(yc.begin(), yc.end(), c);
    p = 2;
    raw = [c, width, n](std::span<const double> y) {
      double f = 0.0;
      double partial = 0.0;
      double total = 0.0;
      for (double v : y) {
        partial += v;
        f += partial * partial;
        total += v;
      }
      const double m = total / n - c;
      return Evaluation{f, {m * m - width * width, detail::sum_squares(y) - 2.0 * n * c * c}, {}};
    };
  }

  std::vector<double> certified(dim);
  for (std::size_t i = 0; i < dim; ++i) certified[i] = o[i] + yc[i];
  // Anchor equalities on the exact shifted coordinates the evaluator will see.
  const Evaluation at_certified = raw(detail::shifted(certified, o));
  std::vector<double> anchor = at_certified.h;

  Evaluator evaluator = [raw, o, anchor](std::span<const double> x) {
    Evaluation e = raw(detail::shifted(x, o));
    for (std::size_t j = 0; j < e.h.size(); ++j) e.h[j] -= anchor[j];
    return e;
  };
  return ConstrainedProblem(name, std::vector<double>(dim, -kSearchRange), std::vector<double>(dim, kSearchRange), p,
                            q, std::move(evaluator), std::move(certified));
}

// ---------------------------------------------------------------------------
// Shift data files: blocks of two lines, "name dim" then D decimal values.

using ShiftTable = std::map<std::pair<std::string, std::size_t>, std::vector<double>>;

inline ShiftTable parse_shift_table(std::istream& in) {
  ShiftTable table;
  std::string header;
  std::size_t line_no = 0;
  while (std::getline(in, header)) {
    ++line_no;
    if (header.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hs(header);
    std::string name;
    std::size_t dim = 0;
    if (!(hs >> name >> dim) || dim == 0) {
      throw ConfigError("shift file line " + std::to_string(line_no) + ": expected 'name dim'");
    }
    std::string values_line;
    if (!std::getline(in, values_line)) {
      throw ConfigError("shift file: missing values for '" + name + "'");
    }
    ++line_no;
    std::istringstream vs(values_line);
    std::vector<double> values;
    std::string token;
    while (vs >> token) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ConfigError("shift file line " + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw ConfigError("shift file line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values for '" + name + "'");
    }
    table[{name, dim}] = std::move(values);
  }
  return table;
}

inline ShiftTable load_shift_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open shift file '" + path + "'");
  return parse_shift_table(in);
}

// ---------------------------------------------------------------------------

class ProblemRegistry {
 public:
  using Constructor = std::function<ConstrainedProblem(std::size_t dim, ShiftSpec shift)>;

  struct Entry {
    Constructor make;
    std::set<std::size_t> dims;  // empty means every positive dimension
  };

  void add(const std::string& name, Constructor make, std::set<std::size_t> dims = {}) {
    if (entries_.count(name) != 0) throw ContractError("problem '" + name + "' is already registered");
    entries_[name] = Entry{std::move(make), std::move(dims)};
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, entry] : entries_) out.push_back(name);
    out.push_back("synthetic/<kind>/<seed>");
    return out;
  }

  bool supports(const std::string& name, std::size_t dim) const {
    try {
      check(name, dim);
      return true;
    } catch (const LookupError&) {
      return false;
    }
  }

  ConstrainedProblem lookup(const std::string& name, std::size_t dim, const ShiftTable* shifts = nullptr) const {
    check(name, dim);
    std::vector<double> o;
    if (shifts != nullptr) {
      if (auto it = shifts->find({name, dim}); it != shifts->end()) o = it->second;
    }
    if (auto it = entries_.find(name); it != entries_.end()) {
      if (o.empty()) o = default_shift(name, dim);
      return it->second.make(dim, ShiftSpec(std::move(o)));
    }
    const auto [kind, seed] = parse_synthetic(name);
    return synthetic_family(seed, dim, kind, std::move(o));
  }

  static const ProblemRegistry& standard() {
    static const ProblemRegistry registry = [] {
      ProblemRegistry r;
      const std::set<std::size_t> cec_dims = {10, 30, 50, 100};
      r.add("cec12", [](std::size_t d, ShiftSpec s) { return make_cec12(d, std::move(s)); }, cec_dims);
      r.add("cec14", [](std::size_t d, ShiftSpec s) { return make_cec14(d, std::move(s)); }, cec_dims);
      r.add("sphere", [](std::size_t d, ShiftSpec s) { return make_sphere(d, std::move(s)); });
      return r;
    }();
    return registry;
  }

 private:
  static constexpr std::size_t kMaxDim = 1000;

  static std::pair<std::string, std::uint64_t> parse_synthetic(const std::string& name) {
    constexpr std::string_view prefix = "synthetic/";
    if (name.rfind(prefix, 0) != 0) return {"", 0};
    const std::string rest = name.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos) return {"", 0};
    std::string kind = rest.substr(0, slash);
    const std::string seed_text = rest.substr(slash + 1);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (seed_text.empty() || ec != std::errc() || ptr != seed_text.data() + seed_text.size()) return {"", 0};
    return {kind, seed};
  }

  void check(const std::string& name, std::size_t dim) const {
    auto valid_names = [this] {
      std::string list;
      for (const auto& n : names()) list += (list.empty() ? "" : ", ") + n;
      return list;
    };
    if (auto it = entries_.find(name); it != entries_.end()) {
      const auto& dims = it->second.dims;
      if (dim == 0 || dim > kMaxDim || (!dims.empty() && dims.count(dim) == 0)) {
        std::string allowed;
        for (auto d : dims) allowed += (allowed.empty() ? "" : ", ") + std::to_string(d);
        throw LookupError("problem '" + name + "' does not support dimension " + std::to_string(dim) +
                          (allowed.empty() ? "" : " (supported: " + allowed + ")"));
      }
      return;
    }
    const auto [kind, seed] = parse_synthetic(name);
    const auto& kinds = synthetic_kinds();
    if (kind.empty() || std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      throw LookupError("unknown problem '" + name + "'; valid names: " + valid_names());
    }
    if (dim == 0 || dim > kMaxDim) {
      throw LookupError("problem '" + name + "' does not support dimension " + std::to_string(dim));
    }
  }

  std::map<std::string, Entry> entries_;
};

inline ConstrainedProblem registry_lookup(const std::string& name, std::size_t dim, const ShiftTable* shifts = nullptr) {
  return ProblemRegistry::standard().lookup(name, dim, shifts);
}

}  // namespace rleceo
