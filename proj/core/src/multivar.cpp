#include "minexp/multivar.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace minexp {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Level Vandermonde systems with a reciprocal condition below this are
// re-drawn (multipliers and, from level 2 on, combination weights).
constexpr double kRedrawRcond = 1e-3;
constexpr int kMaxRedraws = 64;

Point add_scaled(Point base, double a, const Point& dir) {
  for (std::size_t k = 0; k < base.size(); ++k) base[k] += a * dir[k];
  return base;
}

double norm2(const Point& p) {
  return std::sqrt(std::inner_product(p.begin(), p.end(), p.begin(), 0.0));
}

bool frequency_less(Complex a, Complex b) {
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

bool canonical_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

std::string describe(double x) {
  std::ostringstream out;
  out.precision(3);
  out << x;
  return out.str();
}

/// Oracle front end enforcing the budget cap of one recovery run.
class BudgetedSampler {
 public:
  BudgetedSampler(Oracle& oracle, std::size_t cap, const RecoveryReport& report)
      : oracle_(oracle), cap_(cap), start_(oracle.count()), report_(report) {}

  Complex operator()(const Point& point) {
    if (used() >= cap_) {
      RecoveryReport partial = report_;
      partial.samples_used = used();
      throw BudgetExceededError("sample budget of " + std::to_string(cap_) + " exhausted",
                                std::move(partial));
    }
    return oracle_.sample(point);
  }

  std::size_t used() const { return oracle_.count() - start_; }
  std::size_t start() const { return start_; }

 private:
  Oracle& oracle_;
  std::size_t cap_;
  std::size_t start_;
  const RecoveryReport& report_;
};

std::vector<double> draw_multipliers(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, static_cast<double>(count));
  for (;;) {
    std::vector<double> k(count);
    for (auto& x : k) x = dist(rng);
    std::vector<double> sorted = k;
    std::sort(sorted.begin(), sorted.end());
    bool distinct = true;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      distinct = distinct && sorted[i] - sorted[i - 1] > 1e-3;
    if (distinct) return k;
  }
}

/// Orders terms canonically and stores model + aligned inner products.
void store_model(RecoveryReport& report, std::size_t dimension,
                 std::vector<std::vector<Complex>> exponents, std::vector<Complex> coefficients,
                 std::vector<std::vector<Complex>> inner_products) {
  std::vector<std::size_t> order(exponents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(exponents[a], exponents[b]);
  });
  std::vector<Term> terms;
  report.inner_products.clear();
  for (std::size_t j : order) {
    terms.push_back({coefficients[j], std::move(exponents[j])});
    report.inner_products.push_back(std::move(inner_products[j]));
  }
  report.model.emplace(dimension, std::move(terms));
}

/// Least-squares coefficients of fixed exponents against recorded samples.
std::optional<std::vector<Complex>> fit_all_samples(
    const std::vector<std::vector<Complex>>& exponents, std::span<const SampleRecord> samples) {
  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(exponents.size());
  if (rows < cols) return std::nullopt;
  ComplexMatrix m(rows, cols);
  ComplexVector rhs(rows);
  for (Eigen::Index p = 0; p < rows; ++p) {
    rhs(p) = samples[p].value;
    for (Eigen::Index j = 0; j < cols; ++j)
      m(p, j) = std::exp(inner_product(exponents[j], samples[p].point));
  }
  try {
    return to_std(solve_least_squares(m, rhs));
  } catch (const RankDeficientError&) {
    return std::nullopt;
  }
}

template <typename Draw>
RescueOutcome rescue_lines(Draw&& draw, const Point& origin, const Point& direction,
                           const Point& epsilon, std::size_t k_max, std::size_t nu_prev,
                           const RankOptions& options, std::size_t max_terms) {
  RescueOutcome out;
  out.decision.confident = false;
  bool have_confident = false;
  const std::size_t first = k_max == 0 ? 0 : 1;
  const std::size_t last = k_max;
  for (std::size_t k = first; k <= last; ++k) {
    EquidistantSequence line;
    line.step_direction = direction;
    line.origin = k == 0 ? origin : add_scaled(origin, static_cast<double>(k), epsilon);
    auto supplier = [&](std::size_t s) {
      const Complex v = draw(add_scaled(line.origin, static_cast<double>(s), direction));
      line.values.push_back(v);
      return v;
    };
    RankDecision decision;
    try {
      decision = detect_sparsity(supplier, max_terms, options);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSparsityUndetected) throw;
      decision.confident = false;
      decision.rank = 0;
    }
    out.lines.push_back(std::move(line));
    const bool better = decision.confident
                            ? (!have_confident || decision.rank > out.decision.rank)
                            : (!have_confident && decision.rank > out.decision.rank);
    if (better) {
      out.decision = decision;
      have_confident = have_confident || decision.confident;
      out.best_shift = decision.rank > nu_prev ? k : 0;
    }
  }
  return out;
}

void validate_rescue_shift(const Point& direction, const Point& epsilon) {
  if (epsilon.size() != direction.size())
    throw Error(ErrorKind::kInvalidArgument, "rescue shift dimension mismatch");
  const double nd = norm2(direction);
  const double ne = norm2(epsilon);
  if (ne == 0.0) throw Error(ErrorKind::kInvalidArgument, "rescue shift must be nonzero");
  const double cosine = std::inner_product(direction.begin(), direction.end(), epsilon.begin(), 0.0) /
                        (nd * ne);
  if (std::abs(cosine) > 1.0 - 1e-9)
    throw Error(ErrorKind::kInvalidArgument, "rescue shift must not be parallel to the direction");
}

}  // namespace

std::size_t budget_bound(std::size_t d, std::size_t n, std::size_t constant) {
  if (d == 0 || n == 0) throw Error(ErrorKind::kInvalidArgument, "budget_bound: d, n must be >= 1");
  std::size_t best = 0;
  for (std::size_t nu = 1; nu <= n; ++nu) best = std::max(best, nu * (n - nu + 1));
  return constant * (d + 1) * best;
}

std::vector<Complex> solve_shift_system(std::span<const Complex> base_logs,
                                        std::span<const double> kappas,
                                        std::span<const Complex> shift_samples) {
  if (base_logs.size() != kappas.size() || kappas.size() != shift_samples.size())
    throw Error(ErrorKind::kInvalidArgument, "solve_shift_system: length mismatch");
  const ComplexMatrix v = vandermonde(base_logs, kappas);
  try {
    return to_std(solve(v, to_eigen(shift_samples)));
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(std::string("shift system singular; re-draw the multipliers: ") +
                                  e.what(),
                              e.rcond());
  }
}

std::vector<std::vector<Complex>> assemble_exponents(
    const std::vector<std::vector<Complex>>& inner_products, const DirectionBasis& basis) {
  const std::size_t d = basis.dimension();
  const auto lu = basis.direction_matrix().cast<Complex>().eval().fullPivLu();
  if (!lu.isInvertible()) throw Error(ErrorKind::kInvalidBasis, "direction matrix is singular");
  std::vector<std::vector<Complex>> out;
  out.reserve(inner_products.size());
  for (const auto& ip : inner_products) {
    if (ip.size() != d)
      throw Error(ErrorKind::kInvalidArgument, "assemble_exponents: need d inner products per term");
    out.push_back(to_std(lu.solve(to_eigen(ip))));
  }
  return out;
}

PileSplit disentangle_pile(std::span<const Complex> pile_sequence, std::size_t r,
                           PhaseWindow window, NodeMethod method) {
  if (r == 0) throw Error(ErrorKind::kInvalidArgument, "disentangle_pile: rank must be >= 1");
  if (pile_sequence.size() < 2 * r)
    throw Error(ErrorKind::kInvalidArgument, "disentangle_pile: need 2r pile samples");
  PileSplit split;
  for (std::size_t rank = r; rank >= 1; --rank) {
    try {
      if (rank == 1) {
        if (pile_sequence[0] == Complex{})
          throw Error(ErrorKind::kDisentangleFailed, "pile vanishes at s=0");
        // Least-squares ratio over every consecutive pair; equals f[1]/f[0] on exact data.
        Complex num{};
        double den = 0.0;
        for (std::size_t s = 0; s + 1 < pile_sequence.size(); ++s) {
          num += std::conj(pile_sequence[s]) * pile_sequence[s + 1];
          den += std::norm(pile_sequence[s]);
        }
        split.sub_nodes = {num / den};
      } else {
        split.sub_nodes = fit_nodes(pile_sequence, rank, method);
      }
      split.rank_used = rank;
      split.rank_reduced = rank != r;
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRankMismatch || rank == 1) throw;
    }
  }
  split.sub_logs = take_logs(split.sub_nodes, window);
  split.sub_coefficients = fit_coefficients(split.sub_logs, pile_sequence).coefficients;
  return split;
}

Point default_rescue_shift(const Point& direction, std::uint64_t seed) {
  const double target = 1e-2 * norm2(direction);
  if (target == 0.0) throw Error(ErrorKind::kInvalidArgument, "direction must be nonzero");
  if (direction.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "parallel shifts need dimension >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Point eps(direction.size());
    for (auto& x : eps) x = normal(rng);
    const double n = norm2(eps);
    if (n == 0.0) continue;
    for (auto& x : eps) x *= target / n;
    const double cosine =
        std::inner_product(direction.begin(), direction.end(), eps.begin(), 0.0) /
        (norm2(direction) * target);
    if (std::abs(cosine) < 0.99) return eps;
  }
}

RescueOutcome cancellation_rescue(Oracle& oracle, const Point& direction, const Point& epsilon,
                                  std::size_t k_max, std::size_t nu_prev,
                                  const RankOptions& options, std::size_t max_terms,
                                  const Point& origin) {
  const Point o = origin.empty() ? Point(direction.size(), 0.0) : origin;
  if (k_max > 0) validate_rescue_shift(direction, epsilon);
  return rescue_lines([&](const Point& p) { return oracle.sample(p); }, o, direction, epsilon,
                      k_max, nu_prev, options, max_terms);
}

double max_relative_residual(const ExponentialModel& model,
                             std::span<const SampleRecord> samples) {
  double scale = 0.0;
  double worst = 0.0;
  for (const auto& s : samples) {
    scale = std::max(scale, std::abs(s.value));
    worst = std::max(worst, std::abs(evaluate(model, s.point) - s.value));
  }
  return scale > 0.0 ? worst / scale : worst;
}

RecoveryReport recover_known_n(Oracle& oracle, const DirectionBasis& basis, std::size_t n,
                               const RecoveryConfig& config) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "recover_known_n: n must be >= 1");
  if (oracle.dimension() != basis.dimension())
    throw Error(ErrorKind::kInvalidArgument, "oracle and basis dimensions differ");
  const std::size_t d = basis.dimension();
  const Point& delta = basis.direction(0);
  const std::size_t start = oracle.count();
  std::mt19937_64 rng(config.seed);

  RecoveryReport report;
  report.base_origin = Point(d, 0.0);

  std::vector<Complex> values;
  for (std::size_t s = 0; s < 2 * n; ++s)
    values.push_back(oracle.sample(add_scaled(report.base_origin, static_cast<double>(s), delta)));
  report.reference_sample = values.front();

  const auto decision = numerical_rank(hankel(values, n, n), config.rank);
  report.rank_decisions.push_back(decision);
  if (decision.rank < n) {
    throw CollisionDetectedError("base Hankel matrix has rank " + std::to_string(decision.rank) +
                                     " < n; use recover_unknown_n",
                                 decision.rank);
  }
  if (!decision.confident) report.warnings.push_back("base rank decision not confident");

  const auto nodes = fit_nodes(values, n, config.node_method);
  const auto groups = cluster_nodes(nodes, config.node_tol);
  if (groups.size() < n)
    throw CollisionDetectedError("base nodes collide within node_tol", groups.size());
  const auto logs = take_logs(nodes, config.window);
  const auto coeff_fit = fit_coefficients(logs, values, config.coefficient_mode);
  if (coeff_fit.ill_conditioned)
    report.warnings.push_back("ill-conditioned base Vandermonde (condition " +
                              describe(coeff_fit.condition_estimate) + ")");
  const auto& alpha = coeff_fit.coefficients;

  double alpha_max = 0.0;
  for (auto a : alpha) alpha_max = std::max(alpha_max, std::abs(a));
  for (auto a : alpha) {
    if (std::abs(a) < config.cancellation_floor * alpha_max)
      throw Error(ErrorKind::kCancellationSuspected,
                  "recovered coefficient vanishes relative to the largest; suspect cancellation");
  }

  std::vector<std::vector<Complex>> inner(n, std::vector<Complex>{});
  for (std::size_t j = 0; j < n; ++j) inner[j].push_back(logs[j]);

  LevelState level0;
  level0.level = 0;
  level0.pile_count = n;
  level0.omegas = logs;
  level0.samples_drawn = 2 * n;

  for (std::size_t i = 1; i < d; ++i) {
    auto kappas = basis.multipliers(i, n);
    for (int attempt = 0; reciprocal_condition(vandermonde(logs, kappas)) <
                          static_cast<double>(n) * kEps * 10.0;
         ++attempt) {
      if (attempt == kMaxRedraws)
        throw SingularMatrixError("shift system stays singular after re-drawing multipliers", 0.0);
      kappas = draw_multipliers(n, rng);
      report.warnings.push_back("level " + std::to_string(i) + ": re-drew singular multipliers");
    }
    std::vector<Complex> shift_samples;
    for (double kappa : kappas)
      shift_samples.push_back(oracle.sample(add_scaled(basis.direction(i), kappa, delta)));
    const auto a = solve_shift_system(logs, kappas, shift_samples);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex ratio = a[j] / alpha[j];
      inner[j].push_back(take_logs(std::span<const Complex>(&ratio, 1), config.window).front());
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    PileState pile;
    pile.level = 0;
    pile.pile_index = j;
    pile.inner_products = {logs[j]};
    pile.coefficient_sum = alpha[j];
    pile.member_count = 1;
    level0.piles.push_back(std::move(pile));
  }
  report.levels.push_back(std::move(level0));

  auto exponents = assemble_exponents(inner, basis);
  store_model(report, d, std::move(exponents), alpha, std::move(inner));
  report.samples_used = oracle.count() - start;
  return report;
}

RecoveryReport recover_unknown_n(Oracle& oracle, const DirectionBasis& basis,
                                 const RecoveryConfig& config) {
  if (oracle.dimension() != basis.dimension())
    throw Error(ErrorKind::kInvalidArgument, "oracle and basis dimensions differ");
  if (config.max_terms == 0) throw Error(ErrorKind::kInvalidArgument, "max_terms must be >= 1");
  const std::size_t d = basis.dimension();
  const Point& delta = basis.direction(0);
  std::mt19937_64 rng(config.seed);

  RecoveryReport report;
  BudgetedSampler draw(oracle, config.budget_cap.value_or(budget_bound(d, config.max_terms)),
                       report);
  report.base_origin = Point(d, 0.0);

  // Level 0: sparsity and piles along Delta.
  std::vector<Complex> values;
  auto supplier = [&](std::size_t s) {
    const Complex v = draw(add_scaled(report.base_origin, static_cast<double>(s), delta));
    values.push_back(v);
    return v;
  };
  RankDecision decision = detect_sparsity(supplier, config.max_terms, config.rank);
  report.rank_decisions.push_back(decision);
  std::size_t nu = decision.rank;

  if (config.rescue_shifts > 0) {
    if (d < 2) {
      report.warnings.push_back("cancellation rescue needs d >= 2; skipped");
    } else {
      const Point eps = config.rescue_epsilon.value_or(default_rescue_shift(delta, config.seed));
      validate_rescue_shift(delta, eps);
      auto outcome = rescue_lines(draw, report.base_origin, delta, eps, config.rescue_shifts, nu,
                                  config.rank, config.max_terms);
      report.rank_decisions.push_back(outcome.decision);
      if (outcome.best_shift > 0) {
        auto& line = outcome.lines[outcome.best_shift - 1];
        report.warnings.push_back("cancellation rescue: shifted line " +
                                  std::to_string(outcome.best_shift) + " raised the base rank from " +
                                  std::to_string(nu) + " to " +
                                  std::to_string(outcome.decision.rank));
        nu = outcome.decision.rank;
        values = std::move(line.values);
        report.base_origin = std::move(line.origin);
        decision = outcome.decision;
      }
    }
  }
  if (!decision.confident) report.warnings.push_back("level 0: rank decision not confident");
  if (nu == 0)
    throw Error(ErrorKind::kDegenerateModel,
                "base-line samples vanish; the sum cancels on this line (try rescue shifts)");
  report.reference_sample = values.front();

  auto nodes = fit_nodes(values, nu, config.node_method);
  const auto groups = cluster_nodes(nodes, config.node_tol);
  if (groups.size() < nodes.size()) {
    std::vector<Complex> merged;
    for (const auto& g : groups) {
      Complex mean{};
      for (auto idx : g) mean += nodes[idx];
      merged.push_back(mean / static_cast<double>(g.size()));
    }
    nodes = std::move(merged);
    nu = nodes.size();
    report.warnings.push_back("level 0: merged nodes closer than node_tol");
  }
  auto logs = take_logs(nodes, config.window);
  const auto base_fit = fit_coefficients(logs, values, config.coefficient_mode);
  if (base_fit.ill_conditioned)
    report.warnings.push_back("level 0: ill-conditioned Vandermonde (condition " +
                              describe(base_fit.condition_estimate) + ")");

  std::vector<PileState> piles;
  for (std::size_t j = 0; j < nu; ++j) {
    PileState p;
    p.level = 0;
    p.inner_products = {logs[j]};
    p.coefficient_sum = base_fit.coefficients[j];
    piles.push_back(std::move(p));
  }
  std::stable_sort(piles.begin(), piles.end(), [](const PileState& a, const PileState& b) {
    return frequency_less(a.inner_products[0], b.inner_products[0]);
  });
  for (std::size_t j = 0; j < piles.size(); ++j) piles[j].pile_index = j;

  {
    LevelState level0;
    level0.level = 0;
    level0.pile_count = piles.size();
    for (const auto& p : piles) level0.omegas.push_back(p.inner_products[0]);
    level0.samples_drawn = draw.used();
    level0.piles = piles;
    report.levels.push_back(std::move(level0));
  }

  // Levels 1..d-1: split the piles along delta_i.
  for (std::size_t i = 1; i < d; ++i) {
    const std::size_t m = piles.size();
    const std::size_t drawn_before = draw.used();
    std::vector<double> weights = basis.weights(i);
    std::vector<double> kappas = basis.multipliers(i, m);

    auto omegas_for = [&](const std::vector<double>& w) {
      std::vector<Complex> omegas;
      for (const auto& p : piles) {
        Complex o{};
        for (std::size_t t = 0; t < i; ++t) o += w[t] * p.inner_products[t];
        omegas.push_back(o);
      }
      return omegas;
    };
    std::vector<Complex> omegas = omegas_for(weights);
    ComplexMatrix v = vandermonde(omegas, kappas);
    double rc = reciprocal_condition(v);
    std::uniform_real_distribution<double> magnitude(0.05, 0.5);
    std::bernoulli_distribution sign(0.5);
    for (int attempt = 0; rc < kRedrawRcond && attempt < kMaxRedraws; ++attempt) {
      auto trial_weights = weights;
      if (i >= 2) {
        for (std::size_t t = 1; t < i; ++t)
          trial_weights[t] = weights[t] * (1.0 + (sign(rng) ? 1.0 : -1.0) * magnitude(rng));
      }
      const auto trial_kappas = (attempt % 2 == 1 || i == 1) ? draw_multipliers(m, rng) : kappas;
      const auto trial_omegas = omegas_for(trial_weights);
      ComplexMatrix trial = vandermonde(trial_omegas, trial_kappas);
      const double trial_rc = reciprocal_condition(trial);
      if (trial_rc > rc) {
        weights = trial_weights;
        kappas = trial_kappas;
        omegas = trial_omegas;
        v = std::move(trial);
        rc = trial_rc;
        report.warnings.push_back("level " + std::to_string(i) +
                                  ": re-drew multipliers/weights for a regular shift system");
      }
    }
    if (rc < static_cast<double>(m) * kEps)
      throw SingularMatrixError("level " + std::to_string(i) + " shift system is singular", rc);
    if (rc < kRedrawRcond)
      report.warnings.push_back("level " + std::to_string(i) + ": ill-conditioned shift system");

    const Point base_dir = basis.accumulated_direction(i, weights);
    const Eigen::PartialPivLU<ComplexMatrix> lu(v);

    std::vector<std::vector<Complex>> sequences(m);
    for (std::size_t p = 0; p < m; ++p) sequences[p].push_back(piles[p].coefficient_sum);
    std::vector<std::optional<RankDecision>> certified(m);
    std::size_t pending = m;
    for (std::size_t s = 1; pending > 0; s += 2) {
      for (std::size_t step = s; step < s + 2; ++step) {
        ComplexVector rhs(m);
        for (std::size_t l = 0; l < m; ++l) {
          const Point origin = add_scaled(report.base_origin, kappas[l], base_dir);
          rhs(l) = draw(add_scaled(origin, static_cast<double>(step), basis.direction(i)));
        }
        const ComplexVector a = lu.solve(rhs);
        for (std::size_t p = 0; p < m; ++p) sequences[p].push_back(a(p));
      }
      for (std::size_t p = 0; p < m; ++p) {
        if (certified[p]) continue;
        if (auto dec = certify_rank(sequences[p], config.rank)) {
          certified[p] = std::move(dec);
          --pending;
        } else if ((sequences[p].size() + 1) / 2 > config.max_terms) {
          throw Error(ErrorKind::kSparsityUndetected,
                      "level " + std::to_string(i) + ": pile " + std::to_string(p) +
                          " not certified within max_terms");
        }
      }
    }

    LevelState level;
    level.level = i;
    level.omegas = omegas;
    level.multipliers = kappas;
    level.weights = weights;
    for (std::size_t p = 0; p < m; ++p) {
      report.rank_decisions.push_back(*certified[p]);
      level.pile_ranks.push_back(certified[p]->rank);
      if (!certified[p]->confident)
        report.warnings.push_back("level " + std::to_string(i) + ": pile " + std::to_string(p) +
                                  " rank decision not confident");
    }

    auto split_pile = [&](std::size_t p) {
      return disentangle_pile(sequences[p], certified[p]->rank, config.window, config.node_method);
    };
    std::vector<std::optional<PileSplit>> splits(m);
    if (config.parallel_piles && m > 1) {
      std::vector<std::future<PileSplit>> futures(m);
      for (std::size_t p = 0; p < m; ++p)
        if (certified[p]->rank > 0) futures[p] = std::async(std::launch::async, split_pile, p);
      for (std::size_t p = 0; p < m; ++p)
        if (futures[p].valid()) splits[p] = futures[p].get();
    } else {
      for (std::size_t p = 0; p < m; ++p)
        if (certified[p]->rank > 0) splits[p] = split_pile(p);
    }

    std::vector<PileState> next;
    for (std::size_t p = 0; p < m; ++p) {
      if (!splits[p]) {
        report.warnings.push_back("level " + std::to_string(i) + ": pile " + std::to_string(p) +
                                  " vanished (rank 0); dropped");
        report.levels.back().piles[p].member_count = 0;
        continue;
      }
      const auto& split = *splits[p];
      if (split.rank_reduced)
        report.warnings.push_back("level " + std::to_string(i) + ": pile " + std::to_string(p) +
                                  " pencil degenerate; rank lowered to " +
                                  std::to_string(split.rank_used));
      level.pile_ranks[p] = split.rank_used;
      report.levels.back().piles[p].member_count = split.rank_used;

      std::vector<std::size_t> order(split.sub_logs.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return frequency_less(split.sub_logs[a], split.sub_logs[b]);
      });
      for (std::size_t q : order) {
        PileState child;
        child.level = i;
        child.inner_products = piles[p].inner_products;
        child.inner_products.push_back(split.sub_logs[q]);
        child.coefficient_sum = split.sub_coefficients[q];
        child.parent = p;
        next.push_back(std::move(child));
      }
    }
    if (next.empty()) throw Error(ErrorKind::kDegenerateModel, "every pile vanished");
    for (std::size_t j = 0; j < next.size(); ++j) next[j].pile_index = j;
    piles = std::move(next);
    level.pile_count = piles.size();
    level.samples_drawn = draw.used() - drawn_before;
    level.piles = piles;
    report.levels.push_back(std::move(level));
  }

  // Exponents from the accumulated inner products; coefficients from every
  // consumed sample.
  std::vector<std::vector<Complex>> inner;
  std::vector<Complex> pile_coefficients;
  for (const auto& p : piles) {
    inner.push_back(p.inner_products);
    pile_coefficients.push_back(p.coefficient_sum);
  }
  auto exponents = assemble_exponents(inner, basis);
  const auto& calls = oracle.ledger().calls();
  const std::span<const SampleRecord> consumed(calls.begin() + static_cast<std::ptrdiff_t>(draw.start()),
                                               calls.end());
  std::vector<Complex> alpha;
  if (auto refit = fit_all_samples(exponents, consumed)) {
    alpha = std::move(*refit);
  } else {
    report.warnings.push_back("final least-squares refit rank deficient; using pile coefficients");
    alpha = pile_coefficients;
  }
  store_model(report, d, std::move(exponents), std::move(alpha), std::move(inner));
  report.samples_used = draw.used();
  return report;
}

}  // namespace minexp
