#include "minexp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "minexp/multivar.hpp"

namespace minexp {
namespace {

std::string format_point(std::span<const double> point) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (std::size_t i = 0; i < point.size(); ++i) out << (i ? ", " : "") << point[i];
  out << ')';
  return out.str();
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  std::string s = hash == std::string::npos ? line : line.substr(0, hash);
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Point axpy(double a, const Point& x, const Point& y) {
  Point out(y);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * x[k];
  return out;
}

}  // namespace

NoisySource::NoisySource(std::shared_ptr<SampleSource> inner, double sigma, std::uint64_t seed)
    : inner_(std::move(inner)), sigma_(sigma), rng_(seed) {
  if (!inner_) throw Error(ErrorKind::kInvalidArgument, "NoisySource: null inner source");
  if (!(sigma_ >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "NoisySource: sigma must be >= 0");
}

Complex NoisySource::value_at(std::span<const double> point) {
  const Complex clean = inner_->value_at(point);
  const double g1 = normal_(rng_);
  const double g2 = normal_(rng_);
  if (sigma_ == 0.0) return clean;
  return clean + sigma_ * Complex(g1, g2) / std::sqrt(2.0);
}

TabulatedSource::TabulatedSource(std::size_t dimension, double match_tol)
    : dimension_(dimension), match_tol_(match_tol) {
  if (dimension_ == 0) throw Error(ErrorKind::kInvalidArgument, "TabulatedSource: dimension 0");
  if (!(match_tol_ > 0.0)) throw Error(ErrorKind::kInvalidArgument, "TabulatedSource: match_tol must be > 0");
}

TabulatedSource::Key TabulatedSource::quantize(std::span<const double> point) const {
  Key key;
  key.reserve(point.size());
  for (double x : point) {
    const double scaled = std::round(x * 1e12);
    if (!std::isfinite(scaled) || std::abs(scaled) > 9.0e18)
      throw Error(ErrorKind::kInvalidArgument, "sample point out of quantization range");
    key.push_back(static_cast<long long>(scaled));
  }
  return key;
}

void TabulatedSource::insert(Point point, Complex value) {
  if (point.size() != dimension_)
    throw Error(ErrorKind::kInvalidArgument, "TabulatedSource: point dimension mismatch");
  auto key = quantize(point);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    if (std::abs(it->second.value - value) > match_tol_) {
      throw Error(ErrorKind::kInvalidArgument,
                  "conflicting duplicate sample at " + format_point(point));
    }
    return;
  }
  entries_.emplace(std::move(key), SampleRecord{std::move(point), value});
}

Complex TabulatedSource::value_at(std::span<const double> point) {
  if (point.size() != dimension_)
    throw Error(ErrorKind::kInvalidArgument, "TabulatedSource: point dimension mismatch");
  auto within = [&](const Point& stored) {
    for (std::size_t k = 0; k < dimension_; ++k)
      if (std::abs(stored[k] - point[k]) > match_tol_) return false;
    return true;
  };
  if (auto it = entries_.find(quantize(point)); it != entries_.end() && within(it->second.point))
    return it->second.value;
  for (const auto& [key, record] : entries_)
    if (within(record.point)) return record.value;
  throw Error(ErrorKind::kMissingSample, "no tabulated sample at " + format_point(point));
}

TabulatedSource TabulatedSource::read(std::istream& in, double match_tol) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::unique_ptr<TabulatedSource> table;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = strip_comment(line);
    if (s.empty()) continue;
    if (!table) {
      if (s.rfind("dim=", 0) != 0)
        throw Error(ErrorKind::kParseError, "sample file must start with dim=<d>");
      try {
        dim = std::stoul(s.substr(4));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kParseError, "bad dimension header: " + s);
      }
      table = std::make_unique<TabulatedSource>(dim, match_tol);
      continue;
    }
    std::istringstream row(s);
    std::vector<double> fields;
    std::string token;
    while (row >> token) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kParseError,
                    "line " + std::to_string(line_no) + ": not a number: " + token);
      }
    }
    if (fields.size() != dim + 2) {
      throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(dim + 2) + " fields");
    }
    Point p(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(dim));
    table->insert(std::move(p), Complex(fields[dim], fields[dim + 1]));
  }
  if (!table) throw Error(ErrorKind::kParseError, "sample file has no dim=<d> header");
  return std::move(*table);
}

TabulatedSource TabulatedSource::load(const std::string& path, double match_tol) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open sample file " + path);
  return read(in, match_tol);
}

void TabulatedSource::write(std::ostream& out) const {
  std::vector<SampleRecord> records;
  records.reserve(entries_.size());
  for (const auto& [key, record] : entries_) records.push_back(record);
  write_sample_file(out, dimension_, records);
}

void write_sample_file(std::ostream& out, std::size_t dimension,
                       std::span<const SampleRecord> samples) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "dim=" << dimension << '\n';
  for (const auto& s : samples) {
    for (double x : s.point) out << x << ' ';
    out << s.value.real() << ' ' << s.value.imag() << '\n';
  }
  out.precision(old_precision);
}

Oracle::Oracle(std::shared_ptr<SampleSource> source) : source_(std::move(source)) {
  if (!source_) throw Error(ErrorKind::kInvalidArgument, "Oracle: null source");
}

Complex Oracle::sample(std::span<const double> point) {
  if (point.size() != source_->dimension())
    throw Error(ErrorKind::kInvalidArgument, "Oracle: point dimension mismatch");
  const Complex value = source_->value_at(point);
  ledger_.append(Point(point.begin(), point.end()), value);
  return value;
}

std::vector<Point> plan_points(const DirectionBasis& basis, std::size_t n_hint, PlanMode mode) {
  if (n_hint == 0) throw Error(ErrorKind::kInvalidArgument, "plan_points: n_hint must be >= 1");
  const std::size_t d = basis.dimension();
  const Point& delta = basis.direction(0);
  const Point origin(d, 0.0);
  std::vector<Point> points;

  if (mode == PlanMode::kKnownN) {
    for (std::size_t s = 0; s < 2 * n_hint; ++s)
      points.push_back(axpy(static_cast<double>(s), delta, origin));
    for (std::size_t i = 1; i < d; ++i) {
      for (double kappa : basis.multipliers(i, n_hint))
        points.push_back(axpy(kappa, delta, basis.direction(i)));
    }
    return points;
  }

  const std::size_t total = budget_bound(d, n_hint);
  for (std::size_t s = 0; s <= 2 * n_hint && points.size() < total; ++s)
    points.push_back(axpy(static_cast<double>(s), delta, origin));
  if (d == 1) {
    for (std::size_t s = 2 * n_hint + 1; points.size() < total; ++s)
      points.push_back(axpy(static_cast<double>(s), delta, origin));
    return points;
  }
  std::vector<Point> bases;
  std::vector<std::vector<double>> kappas;
  for (std::size_t i = 1; i < d; ++i) {
    bases.push_back(basis.accumulated_direction(i, basis.weights(i)));
    kappas.push_back(basis.multipliers(i, n_hint));
  }
  // Level-major over s <= 2n first (the worst-case superset), then keep
  // extending s round-robin until the budget is filled.
  for (std::size_t i = 1; i < d && points.size() < total; ++i) {
    for (std::size_t s = 1; s <= 2 * n_hint && points.size() < total; ++s) {
      for (double kappa : kappas[i - 1]) {
        if (points.size() == total) break;
        points.push_back(axpy(static_cast<double>(s), basis.direction(i),
                              axpy(kappa, bases[i - 1], origin)));
      }
    }
  }
  for (std::size_t s = 2 * n_hint + 1; points.size() < total; ++s) {
    for (std::size_t i = 1; i < d && points.size() < total; ++i) {
      for (double kappa : kappas[i - 1]) {
        if (points.size() == total) break;
        points.push_back(axpy(static_cast<double>(s), basis.direction(i),
                              axpy(kappa, bases[i - 1], origin)));
      }
    }
  }
  return points;
}

ExponentialModel generate_admissible_model(const DirectionBasis& basis, std::size_t n,
                                           std::uint64_t seed,
                                           const GenerationOptions& options) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "generate: n must be >= 1");
  if (!(options.margin > 0.0 && options.margin < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "generate: margin must lie in (0,1)");
  const std::size_t d = basis.dimension();
  const double half = (1.0 - options.margin) * std::numbers::pi;
  const double centre = options.window.centre();
  const Eigen::MatrixXcd directions = basis.direction_matrix().cast<Complex>();
  const auto lu = directions.partialPivLu();

  std::vector<double> norms;
  for (const auto& dir : basis.directions())
    norms.push_back(std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0)));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::size_t> slots(n);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    const double width = 2.0 * half / static_cast<double>(n);

    std::vector<Term> terms;
    std::vector<Complex> base_logs;
    for (std::size_t j = 0; j < n; ++j) {
      ComplexVector projections(d);
      for (std::size_t i = 0; i < d; ++i) {
        const double re = uniform(-options.real_spread, options.real_spread);
        const double im = i == 0 ? centre - half + (slots[j] + uniform(0.2, 0.8)) * width
                                 : centre + uniform(-half, half);
        projections(i) = Complex(re, im);
      }
      base_logs.push_back(projections(0));
      const ComplexVector phi = lu.solve(projections);
      const double magnitude = std::exp(uniform(std::log(0.1), std::log(10.0)));
      const double phase = uniform(-std::numbers::pi, std::numbers::pi);
      terms.push_back({std::polar(magnitude, phase), to_std(phi)});
    }
    ExponentialModel model(d, std::move(terms));

    const auto cert = validate_nyquist(model, basis, options.window);
    bool ok = cert.valid;
    for (std::size_t j = 0; ok && j < n; ++j)
      for (std::size_t i = 0; ok && i < d; ++i)
        ok = cert.margins[j][i] >= options.margin * std::numbers::pi / norms[i] * (1.0 - 1e-9);
    for (std::size_t a = 0; ok && a < n; ++a)
      for (std::size_t b = a + 1; ok && b < n; ++b)
        ok = std::abs(std::exp(base_logs[a]) - std::exp(base_logs[b])) >= options.min_separation;
    if (ok) return model;
  }
  throw Error(ErrorKind::kGenerationFailed,
              "could not draw an admissible model within the retry limit");
}

}  // namespace minexp
