#include "qtune/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qtune/error.hpp"
#include "qtune/io.hpp"
#include "qtune/random.hpp"

namespace qtune {
namespace {

void check_metric(double m, std::uint64_t k) {
  if (!std::isfinite(m) || m < 0.0 || m > 1.0) {
    throw IntegrityError("metric at flat index " + std::to_string(k) + " is " + format_double(m) +
                         ", expected a finite value in [0, 1]");
  }
}

double max_sq_distance(const SearchSpace& space) {
  double total = 0.0;
  for (const auto& d : space.dimensions()) {
    if (d.size() < 2) continue;
    total += d.encoding() == Encoding::kOneHot ? 2.0 : 1.0;
  }
  return total > 0.0 ? total : 1.0;
}

// Row-normalized Gaussian kernel over one dimension's value encodings.
std::vector<double> dimension_kernel(const Dimension& dim, double smoothness) {
  const std::size_t n = dim.size();
  const std::size_t w = dim.encoded_width();
  std::vector<double> enc(n * w);
  for (std::size_t v = 0; v < n; ++v) {
    dim.encode_into(v, std::span<double>(enc).subspan(v * w, w));
  }
  std::vector<double> kernel(n * n);
  const double denom = 2.0 * smoothness * smoothness;
  for (std::size_t a = 0; a < n; ++a) {
    double row_sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < w; ++j) {
        const double diff = enc[a * w + j] - enc[b * w + j];
        d2 += diff * diff;
      }
      kernel[a * n + b] = std::exp(-d2 / denom);
      row_sum += kernel[a * n + b];
    }
    for (std::size_t b = 0; b < n; ++b) kernel[a * n + b] /= row_sum;
  }
  return kernel;
}

std::vector<double> random_smooth_table(const SearchSpace& space, std::uint64_t seed,
                                        double smoothness) {
  const std::uint64_t card = space.cardinality();
  const std::uint64_t base = splitmix64(seed);
  std::vector<double> field(card);
  for (std::uint64_t k = 0; k < card; ++k) field[k] = unit_interval(splitmix64(base + k));

  // The product kernel is separable, so smoothing is one pass per axis.
  const auto& dims = space.dimensions();
  std::vector<double> scratch;
  std::uint64_t stride = card;
  for (const auto& dim : dims) {
    const std::size_t n = dim.size();
    stride /= n;
    if (n == 1) continue;
    const auto kernel = dimension_kernel(dim, smoothness);
    scratch.resize(n);
    const std::uint64_t block = stride * n;
    for (std::uint64_t outer = 0; outer < card; outer += block) {
      for (std::uint64_t inner = 0; inner < stride; ++inner) {
        const std::uint64_t origin = outer + inner;
        for (std::size_t a = 0; a < n; ++a) {
          double acc = 0.0;
          for (std::size_t b = 0; b < n; ++b) acc += kernel[a * n + b] * field[origin + b * stride];
          scratch[a] = acc;
        }
        for (std::size_t a = 0; a < n; ++a) field[origin + a * stride] = scratch[a];
      }
    }
  }

  auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
  const double lo = *lo_it, hi = *hi_it;
  for (auto& f : field) f = hi > lo ? (f - lo) / (hi - lo) : 0.5;
  return field;
}

std::string join_indices(const Configuration& c) {
  std::string s;
  for (std::size_t i = 0; i < c.indices.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(c.indices[i]);
  }
  return s;
}

}  // namespace

std::string_view direction_name(Direction d) {
  return d == Direction::kMaximize ? "maximize" : "minimize";
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

Surface::Surface(std::shared_ptr<const SearchSpace> space, SurfaceKind kind, Direction direction,
                 std::shared_ptr<const std::vector<double>> table)
    : space_(std::move(space)),
      kind_(std::move(kind)),
      direction_(direction),
      table_(std::move(table)),
      max_sq_distance_(max_sq_distance(*space_)) {}

Surface Surface::tabular(SearchSpace space, std::vector<double> metrics, Direction direction) {
  if (metrics.size() != space.cardinality()) {
    throw IntegrityError("tabular surface has " + std::to_string(metrics.size()) +
                         " metrics, space cardinality is " + std::to_string(space.cardinality()));
  }
  for (std::uint64_t k = 0; k < metrics.size(); ++k) check_metric(metrics[k], k);
  return Surface(std::make_shared<const SearchSpace>(std::move(space)), TabularKind{}, direction,
                 std::make_shared<const std::vector<double>>(std::move(metrics)));
}

Surface Surface::quadratic(SearchSpace space, Configuration optimum, double curvature,
                           Direction direction) {
  space.validate(optimum);
  if (!(curvature > 0.0) || !std::isfinite(curvature)) {
    throw ArgumentError("quadratic surface curvature must be positive and finite");
  }
  return Surface(std::make_shared<const SearchSpace>(std::move(space)),
                 QuadraticKind{std::move(optimum), curvature}, direction, nullptr);
}

Surface Surface::random_smooth(SearchSpace space, std::uint64_t seed, double smoothness,
                               Direction direction) {
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) {
    throw ArgumentError("random-smooth surface smoothness must be positive and finite");
  }
  if (space.cardinality() > kDeskScaleLimit) {
    throw SpaceError("random-smooth surface needs cardinality <= " +
                     std::to_string(kDeskScaleLimit) + ", got " +
                     std::to_string(space.cardinality()));
  }
  auto table = std::make_shared<const std::vector<double>>(random_smooth_table(space, seed, smoothness));
  return Surface(std::make_shared<const SearchSpace>(std::move(space)),
                 RandomSmoothKind{seed, smoothness}, direction, std::move(table));
}

double Surface::evaluate(const Configuration& config) const {
  if (const auto* q = std::get_if<QuadraticKind>(&kind_)) {
    space_->validate(config);
    double d2 = 0.0;
    const auto& dims = space_->dimensions();
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const std::size_t a = config.indices[i], b = q->optimum.indices[i];
      if (a == b) continue;
      if (dims[i].encoding() == Encoding::kOneHot) {
        d2 += 2.0;
      } else {
        double ea, eb;
        dims[i].encode_into(a, {&ea, 1});
        dims[i].encode_into(b, {&eb, 1});
        d2 += (ea - eb) * (ea - eb);
      }
    }
    return std::clamp(1.0 - q->curvature * d2 / max_sq_distance_, 0.0, 1.0);
  }
  return (*table_)[space_->flat_index(config)];
}

double Surface::evaluate_flat(std::uint64_t k) const {
  if (table_) {
    if (k >= table_->size()) {
      throw SpaceError("flat index " + std::to_string(k) + " out of range (cardinality " +
                       std::to_string(table_->size()) + ")");
    }
    return (*table_)[k];
  }
  return evaluate(space_->config_from_flat_index(k));
}

double Surface::score(const Configuration& config) const {
  const double m = evaluate(config);
  return direction_ == Direction::kMaximize ? m : 1.0 - m;
}

double Surface::score_flat(std::uint64_t k) const {
  const double m = evaluate_flat(k);
  return direction_ == Direction::kMaximize ? m : 1.0 - m;
}

std::optional<std::span<const double>> Surface::table() const {
  if (!table_) return std::nullopt;
  return std::span<const double>(*table_);
}

Surface Surface::materialize() const {
  if (table_) {
    Surface s(space_, TabularKind{}, direction_, table_);
    s.source_ = provenance();
    return s;
  }
  const std::uint64_t card = space_->cardinality();
  if (card > kDeskScaleLimit) {
    throw SpaceError("cannot materialize a surface with cardinality " + std::to_string(card));
  }
  std::vector<double> metrics(card);
  for (std::uint64_t k = 0; k < card; ++k) metrics[k] = evaluate_flat(k);
  Surface s(space_, TabularKind{}, direction_,
            std::make_shared<const std::vector<double>>(std::move(metrics)));
  s.source_ = provenance();
  return s;
}

std::string Surface::provenance() const {
  if (!source_.empty()) return source_;
  if (const auto* q = std::get_if<QuadraticKind>(&kind_)) {
    return "quadratic optimum=" + join_indices(q->optimum) + " curvature=" + format_double(q->curvature);
  }
  if (const auto* r = std::get_if<RandomSmoothKind>(&kind_)) {
    return "random_smooth seed=" + std::to_string(r->seed) + " smoothness=" +
           format_double(r->smoothness) + " algorithm=" + std::string(kRandomSmoothAlgorithm);
  }
  return "tabular";
}

BestOf best_of(const Surface& surface, std::uint64_t limit) {
  const std::uint64_t card = surface.space().cardinality();
  if (card > limit) {
    throw SpaceError("best_of refuses cardinality " + std::to_string(card) + " (limit " +
                     std::to_string(limit) + ")");
  }
  std::uint64_t best_k = 0;
  double best_score = surface.score_flat(0);
  for (std::uint64_t k = 1; k < card; ++k) {
    const double s = surface.score_flat(k);
    if (s > best_score) {
      best_score = s;
      best_k = k;
    }
  }
  return BestOf{surface.space().config_from_flat_index(best_k), best_k, surface.evaluate_flat(best_k),
                best_score};
}

double CountingEvaluator::score(const Configuration& config) {
  if (used_ >= budget_) {
    throw BudgetExceeded("evaluation budget of " + std::to_string(budget_) + " exhausted");
  }
  ++used_;
  return surface_.score(config);
}

MetaFeatures MetaFeatures::from_vector(std::span<const double> v) {
  if (v.size() != kSize) {
    throw ArgumentError("metafeature vector needs " + std::to_string(kSize) + " entries, got " +
                        std::to_string(v.size()));
  }
  MetaFeatures mf;
  for (std::size_t i = 0; i < kSize; ++i) {
    if (!std::isfinite(v[i])) throw ArgumentError("metafeature " + std::to_string(i) + " is not finite");
    mf.values[i] = v[i];
  }
  return mf;
}

MetaFeatures metafeatures(const DatasetSummary& s) {
  std::vector<std::string> missing;
  if (!s.num_instances) missing.push_back("num_instances");
  if (!s.num_numeric_features) missing.push_back("num_numeric_features");
  if (!s.num_categorical_features) missing.push_back("num_categorical_features");
  if (!s.num_classes) missing.push_back("num_classes");
  if (!s.feature_means) missing.push_back("feature_means");
  if (!s.feature_stds) missing.push_back("feature_stds");
  if (!s.feature_skews) missing.push_back("feature_skews");
  if (!missing.empty()) {
    std::string msg = "dataset summary is missing:";
    for (const auto& m : missing) msg += " " + m;
    throw ArgumentError(msg);
  }
  const std::uint64_t features = *s.num_numeric_features + *s.num_categorical_features;
  if (*s.num_instances < 1) throw ArgumentError("dataset summary needs at least one instance");
  if (features < 1) throw ArgumentError("dataset summary needs at least one feature");

  auto mean_of = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != *s.num_numeric_features) {
      throw ArgumentError(std::string(name) + " has " + std::to_string(v.size()) +
                          " entries, expected one per numeric feature (" +
                          std::to_string(*s.num_numeric_features) + ")");
    }
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };

  std::array<double, MetaFeatures::kSize> out{
      std::log10(static_cast<double>(*s.num_instances)),
      std::log10(static_cast<double>(features)),
      static_cast<double>(*s.num_numeric_features),
      static_cast<double>(*s.num_categorical_features),
      static_cast<double>(*s.num_classes),
      mean_of(*s.feature_means, "feature_means"),
      mean_of(*s.feature_stds, "feature_stds"),
      mean_of(*s.feature_skews, "feature_skews"),
  };
  return MetaFeatures::from_vector(out);
}

void write_tabular(std::ostream& os, const Surface& surface) {
  for (const auto& d : surface.space().dimensions()) os << "#space " << d.to_spec() << '\n';
  os << "#direction " << direction_name(surface.direction()) << '\n';
  if (const auto source = surface.provenance(); source != "tabular") os << "#source " << source << '\n';
  const std::uint64_t card = surface.space().cardinality();
  if (card > kDeskScaleLimit) {
    throw SpaceError("cannot write a tabular file for cardinality " + std::to_string(card));
  }
  for (std::uint64_t k = 0; k < card; ++k) {
    os << k << ',' << format_double(surface.evaluate_flat(k)) << '\n';
  }
}

Surface read_tabular(std::istream& is) {
  std::vector<Dimension> dims;
  std::optional<Direction> direction;
  std::string source;
  std::vector<double> metrics;
  std::string line;
  std::size_t lineno = 0;
  bool in_body = false;

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(lineno, "empty line");
    if (line.front() == '#') {
      if (in_body) throw ParseError(lineno, "header line after body rows");
      std::string_view rest(line);
      rest.remove_prefix(1);
      auto sp = rest.find(' ');
      std::string_view key = rest.substr(0, sp);
      std::string_view value = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
      if (key == "space") {
        try {
          dims.push_back(Dimension::parse_spec(value));
        } catch (const SpaceError& e) {
          throw ParseError(lineno, e.what());
        }
      } else if (key == "direction") {
        if (value == "maximize") {
          direction = Direction::kMaximize;
        } else if (value == "minimize") {
          direction = Direction::kMinimize;
        } else {
          throw ParseError(lineno, "direction must be maximize or minimize");
        }
      } else if (key == "source") {
        source = std::string(value);
      } else {
        throw ParseError(lineno, "unknown header '#" + std::string(key) + "'");
      }
      continue;
    }
    in_body = true;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(lineno, "expected <flat_index>,<metric>");
    std::uint64_t k = 0;
    const char* b = line.data();
    const char* e = b + comma;
    auto r1 = std::from_chars(b, e, k);
    if (r1.ec != std::errc() || r1.ptr != e) throw ParseError(lineno, "bad flat index");
    if (k != metrics.size()) {
      throw ParseError(lineno, "expected flat index " + std::to_string(metrics.size()) + ", got " +
                                   std::to_string(k));
    }
    double m = 0.0;
    const char* mb = line.data() + comma + 1;
    const char* me = line.data() + line.size();
    auto r2 = std::from_chars(mb, me, m);
    if (r2.ec != std::errc() || r2.ptr != me) throw ParseError(lineno, "bad metric");
    if (!std::isfinite(m) || m < 0.0 || m > 1.0) throw ParseError(lineno, "metric outside [0, 1]");
    metrics.push_back(m);
  }
  if (lineno == 0) throw ParseError(0, "empty tabular file");
  if (dims.empty()) throw ParseError(lineno, "no #space header");
  if (!direction) throw ParseError(lineno, "no #direction header");

  SearchSpace space = [&] {
    try {
      return SearchSpace(std::move(dims));
    } catch (const SpaceError& err) {
      throw ParseError(0, err.what());
    }
  }();
  if (metrics.size() != space.cardinality()) {
    throw IntegrityError("tabular file has " + std::to_string(metrics.size()) +
                         " rows, declared space has " + std::to_string(space.cardinality()) +
                         " cells");
  }
  Surface s = Surface::tabular(std::move(space), std::move(metrics), *direction);
  s.source_ = std::move(source);
  return s;
}

void save_tabular(const std::filesystem::path& path, const Surface& surface) {
  std::ostringstream os;
  write_tabular(os, surface);
  write_file_atomic(path, os.str());
}

Surface load_tabular(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tabular file " + path.string());
  return read_tabular(in);
}

}  // namespace qtune
