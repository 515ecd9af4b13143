#include "klrisk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace klrisk {

std::size_t enumeration_cap() {
  if (const char* env = std::getenv("KLRISK_MAX_ENUM")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultEnumerationCap;
}

// ---------------------------------------------------------------------------
// SampleSpace

SampleSpace::SampleSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw DomainError("sample space must be nonempty");
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw DomainError("duplicate sample space label '" + labels_[i] + "'");
  }
}

std::optional<std::size_t> SampleSpace::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const SampleSpace>(std::move(labels));
}

SpacePtr integer_space(std::size_t count) {
  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = std::to_string(i);
  return make_space(std::move(labels));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (!same_space(a, b)) throw StructuralError(std::string(what) + ": sample spaces differ");
}

// ---------------------------------------------------------------------------
// Distribution

Distribution::Distribution(SpacePtr space, Eigen::VectorXd log_mass)
    : space_(std::move(space)), log_mass_(std::move(log_mass)) {
  if (!space_) throw StructuralError("distribution without a sample space");
  if (static_cast<std::size_t>(log_mass_.size()) != space_->size())
    throw StructuralError("distribution length does not match its sample space");
  for (Eigen::Index i = 0; i < log_mass_.size(); ++i) {
    const double v = log_mass_(i);
    if (std::isnan(v) || v == kInf) throw DomainError("invalid log mass");
  }
  // Scalar std::exp: the vectorized Eigen exp does not map -inf to exactly 0.
  probs_ = log_mass_.unaryExpr([](double v) { return std::exp(v); });
  const double total = pairwise_sum(probs_);
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw DomainError("probabilities sum to " + format_double(total) + ", not 1");
  }
}

Distribution Distribution::from_log_weights(SpacePtr space, const Eigen::VectorXd& log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) throw DomainError("log weights cannot be normalized");
  Eigen::VectorXd lm = log_weights.array() - norm;
  for (Eigen::Index i = 0; i < lm.size(); ++i)
    if (log_weights(i) == -kInf) lm(i) = -kInf;
  return Distribution(std::move(space), std::move(lm));
}

Distribution Distribution::from_probabilities(SpacePtr space, const Eigen::VectorXd& probs) {
  Eigen::VectorXd lm(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!(probs(i) >= 0.0)) throw DomainError("negative or NaN probability");
    lm(i) = probs(i) > 0.0 ? std::log(probs(i)) : -kInf;
  }
  return Distribution(std::move(space), std::move(lm));
}

Distribution Distribution::point_mass(SpacePtr space, std::size_t index) {
  if (!space || index >= space->size()) throw DomainError("point mass index out of range");
  Eigen::VectorXd lm = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(space->size()), -kInf);
  lm(static_cast<Eigen::Index>(index)) = 0.0;
  return Distribution(std::move(space), std::move(lm));
}

Distribution Distribution::uniform(SpacePtr space) {
  const auto n = static_cast<Eigen::Index>(space->size());
  return Distribution(std::move(space), Eigen::VectorXd::Constant(n, -std::log(static_cast<double>(n))));
}

bool Distribution::has_full_support() const {
  return (log_mass_.array() > -kInf).all();
}

std::vector<std::size_t> Distribution::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (!is_zero(i)) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Statistic

Statistic::Statistic(SpacePtr space, Eigen::MatrixXd values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw StructuralError("statistic without a sample space");
  if (static_cast<std::size_t>(values_.rows()) != space_->size())
    throw StructuralError("statistic needs one value per sample point");
  if (values_.cols() < 1) throw DomainError("statistic dimension must be positive");
  if (!values_.allFinite()) throw DomainError("statistic values must be finite");
}

Statistic Statistic::scalar(SpacePtr space, const std::vector<double>& values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return Statistic(std::move(space), std::move(m));
}

// ---------------------------------------------------------------------------
// IIDSpace

IIDSpace::IIDSpace(SpacePtr base, int n) : base_(std::move(base)), n_(n) {
  if (!base_) throw StructuralError("product space without a base space");
  if (n_ < 1) throw DomainError("sample size must be positive");
  const std::size_t cap = enumeration_cap();
  std::size_t count = 1;
  for (int i = 0; i < n_; ++i) {
    if (count > cap / base_->size()) {
      std::ostringstream msg;
      msg << "enumerating " << base_->size() << "^" << n_ << " outcomes exceeds the cap of " << cap
          << "; route the computation through sufficient-statistic level sets";
      throw SizeError(msg.str());
    }
    count *= base_->size();
  }
  if (n_ == 1) {
    outcomes_ = base_;
    return;
  }
  std::vector<std::string> labels(count);
  std::vector<std::size_t> digits(static_cast<std::size_t>(n_), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::string label;
    for (int j = 0; j < n_; ++j) {
      if (j) label += '|';
      label += base_->label(digits[static_cast<std::size_t>(j)]);
    }
    labels[k] = std::move(label);
    for (int j = n_ - 1; j >= 0; --j) {
      auto& d = digits[static_cast<std::size_t>(j)];
      if (++d < base_->size()) break;
      d = 0;
    }
  }
  outcomes_ = make_space(std::move(labels));
}

std::vector<std::size_t> IIDSpace::coordinates(std::size_t outcome) const {
  std::vector<std::size_t> coords(static_cast<std::size_t>(n_));
  for (int j = n_ - 1; j >= 0; --j) {
    coords[static_cast<std::size_t>(j)] = outcome % base_->size();
    outcome /= base_->size();
  }
  return coords;
}

std::size_t IIDSpace::index_of(std::span<const std::size_t> coordinates) const {
  if (coordinates.size() != static_cast<std::size_t>(n_)) throw DomainError("wrong number of coordinates");
  std::size_t k = 0;
  for (std::size_t c : coordinates) {
    if (c >= base_->size()) throw DomainError("coordinate out of range");
    k = k * base_->size() + c;
  }
  return k;
}

Statistic sum_statistic(const IIDSpace& space, const Statistic& t) {
  require_same_space(space.base(), t.space(), "sum_statistic");
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(space.size()), t.dimension());
  for (std::size_t k = 0; k < space.size(); ++k)
    for (std::size_t c : space.coordinates(k))
      values.row(static_cast<Eigen::Index>(k)) += t.values().row(static_cast<Eigen::Index>(c));
  return Statistic(space.outcomes(), std::move(values));
}

Statistic coordinate_statistic(const IIDSpace& space, int coordinate, const Statistic& t) {
  require_same_space(space.base(), t.space(), "coordinate_statistic");
  if (coordinate < 0 || coordinate >= space.n()) throw DomainError("coordinate out of range");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(space.size()), t.dimension());
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto c = space.coordinates(k)[static_cast<std::size_t>(coordinate)];
    values.row(static_cast<Eigen::Index>(k)) = t.values().row(static_cast<Eigen::Index>(c));
  }
  return Statistic(space.outcomes(), std::move(values));
}

// ---------------------------------------------------------------------------
// Level sets

namespace {

// -1, 0, 1 lexicographic comparison with per-coordinate tolerance.
int compare_values(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tolerance) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a(j) < b(j) - tolerance) return -1;
    if (a(j) > b(j) + tolerance) return 1;
  }
  return 0;
}

}  // namespace

std::optional<std::size_t> LevelSets::find(const Eigen::VectorXd& value, double tolerance) const {
  auto it = std::lower_bound(values.begin(), values.end(), value, [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return compare_values(a, b, tolerance) < 0;
  });
  if (it == values.end() || compare_values(*it, value, tolerance) != 0) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

LevelSets level_sets(const Statistic& s, double tolerance) {
  const std::size_t n = s.space()->size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return compare_values(s.value(a), s.value(b), tolerance) < 0;
  });
  LevelSets out;
  out.level_of.assign(n, 0);
  for (std::size_t i : order) {
    const Eigen::VectorXd v = s.value(i);
    if (out.values.empty() || compare_values(out.values.back(), v, tolerance) != 0) {
      out.values.push_back(v);
      out.members.emplace_back();
    }
    out.members.back().push_back(i);
    out.level_of[i] = out.values.size() - 1;
  }
  for (auto& m : out.members) std::sort(m.begin(), m.end());
  return out;
}

// ---------------------------------------------------------------------------
// Operations

double kl_divergence(const Distribution& r1, const Distribution& r2) {
  require_same_space(r1.space(), r2.space(), "kl_divergence");
  Eigen::VectorXd terms(static_cast<Eigen::Index>(r1.size()));
  Eigen::Index used = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1.is_zero(i)) continue;
    if (r2.is_zero(i)) return kInf;
    terms(used++) = r1.prob(i) * (r1.log_prob(i) - r2.log_prob(i));
  }
  return std::max(0.0, pairwise_sum(terms.head(used)));
}

Eigen::VectorXd mean_of_statistic(const Distribution& r, const Statistic& t) {
  require_same_space(r.space(), t.space(), "mean_of_statistic");
  const Eigen::VectorXd p = r.probabilities();
  Eigen::VectorXd mean(t.dimension());
  Eigen::VectorXd column(p.size());
  for (Eigen::Index j = 0; j < t.dimension(); ++j) {
    column = p.cwiseProduct(t.values().col(j));
    mean(j) = pairwise_sum(column);
  }
  return mean;
}

Distribution mixture(const Eigen::VectorXd& weights, std::span<const Distribution> parts) {
  if (parts.empty()) throw DomainError("mixture of no parts");
  if (static_cast<std::size_t>(weights.size()) != parts.size())
    throw DomainError("mixture needs one weight per part");
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw DomainError("mixture weights must be nonnegative");
  const double total = pairwise_sum(weights);
  if (std::abs(total - 1.0) > kMassTolerance)
    throw DomainError("mixture weights sum to " + format_double(total) + ", not 1");
  for (const auto& part : parts) require_same_space(parts.front().space(), part.space(), "mixture");
  if ((weights.array() > 0.0).count() == 1) {
    Eigen::Index only = 0;
    weights.maxCoeff(&only);
    return parts[static_cast<std::size_t>(only)];
  }

  const auto m = static_cast<Eigen::Index>(parts.size());
  const auto points = static_cast<Eigen::Index>(parts.front().size());
  // Column j holds each part's contribution at point j, so every column is a
  // contiguous pairwise reduction.
  Eigen::MatrixXd contrib(m, points);
  for (Eigen::Index i = 0; i < m; ++i)
    contrib.row(i) = weights(i) * parts[static_cast<std::size_t>(i)].probabilities().transpose();
  Eigen::VectorXd probs(points);
  for (Eigen::Index j = 0; j < points; ++j) probs(j) = pairwise_sum(contrib.col(j));
  return Distribution::from_probabilities(parts.front().space(), probs);
}

Distribution iid_pmf(const Distribution& r0, const IIDSpace& space) {
  require_same_space(r0.space(), space.base(), "iid_pmf");
  Eigen::VectorXd lm(static_cast<Eigen::Index>(space.size()));
  for (std::size_t k = 0; k < space.size(); ++k) {
    double acc = 0.0;
    for (std::size_t c : space.coordinates(k)) acc += r0.log_prob(c);
    lm(static_cast<Eigen::Index>(k)) = acc;
  }
  return Distribution::from_log_weights(space.outcomes(), lm);
}

Distribution conditional_sample_law(const Distribution& r0n, const Statistic& s, const Eigen::VectorXd& value,
                                    double tolerance) {
  require_same_space(r0n.space(), s.space(), "conditional_sample_law");
  if (value.size() != s.dimension()) throw DomainError("statistic value has the wrong dimension");
  Eigen::VectorXd lm = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r0n.size()), -kInf);
  bool any = false;
  for (std::size_t i = 0; i < r0n.size(); ++i) {
    if (((s.value(i) - value).array().abs() <= tolerance).all()) {
      lm(static_cast<Eigen::Index>(i)) = r0n.log_prob(i);
      any = any || !r0n.is_zero(i);
    }
  }
  if (!any) throw DomainError("conditioning on a level set of zero probability");
  return Distribution::from_log_weights(r0n.space(), lm);
}

}  // namespace klrisk
