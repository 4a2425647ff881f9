#include "airig/oracle.hpp"

#include "airig/json_io.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace airig {
namespace {

using nlohmann::json;

class AffineOracle final : public Oracle {
 public:
  AffineOracle(Vector c, double c0) : c_(std::move(c)), c0_(c0) {}

  Index dimension() const override { return c_.size(); }

  double evaluate(const Vector& x, Vector& g) const override {
    require_dim(x, c_.size(), "affine oracle");
    g = c_;
    return c_.dot(x) + c0_;
  }

  double value(const Vector& x) const override {
    require_dim(x, c_.size(), "affine oracle");
    return c_.dot(x) + c0_;
  }

  json to_json() const override {
    return {{"type", "affine"}, {"c", json_io::from_vector(c_)}, {"c0", c0_}};
  }

 private:
  Vector c_;
  double c0_;
};

class QuadraticOracle final : public Oracle {
 public:
  QuadraticOracle(Matrix Q, Vector c, double c0) : Q_(std::move(Q)), c_(std::move(c)), c0_(c0) {
    require(Q_.rows() == Q_.cols() && Q_.rows() == c_.size(), "quadratic oracle: shape mismatch");
    require((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + Q_.cwiseAbs().maxCoeff()),
            "quadratic oracle: Q must be symmetric");
  }

  Index dimension() const override { return c_.size(); }

  double evaluate(const Vector& x, Vector& g) const override {
    require_dim(x, c_.size(), "quadratic oracle");
    g.noalias() = Q_ * x;
    const double v = 0.5 * x.dot(g) + c_.dot(x) + c0_;
    g += c_;
    return v;
  }

  json to_json() const override {
    return {{"type", "quadratic"},
            {"Q", json_io::from_matrix(Q_)},
            {"c", json_io::from_vector(c_)},
            {"c0", c0_}};
  }

 private:
  Matrix Q_;
  Vector c_;
  double c0_;
};

class MaxAffineOracle final : public Oracle {
 public:
  MaxAffineOracle(Matrix G, Vector g) : G_(std::move(G)), g_(std::move(g)) {
    require(G_.rows() >= 1, "hinge-max oracle: needs at least one piece");
    require(G_.rows() == g_.size(), "hinge-max oracle: G and g row counts differ");
  }

  Index dimension() const override { return G_.cols(); }

  double evaluate(const Vector& x, Vector& sub) const override {
    Index best = 0;
    const double v = max_piece(x, best);
    sub = G_.row(best).transpose();
    return v;
  }

  double value(const Vector& x) const override {
    Index best = 0;
    return max_piece(x, best);
  }

  json to_json() const override {
    return {{"type", "hinge-max"}, {"G", json_io::from_matrix(G_)}, {"g", json_io::from_vector(g_)}};
  }

 private:
  double max_piece(const Vector& x, Index& best) const {
    require_dim(x, G_.cols(), "hinge-max oracle");
    const Vector pieces = G_ * x + g_;
    return pieces.maxCoeff(&best);
  }

  Matrix G_;
  Vector g_;
};

class SvmObjectiveOracle final : public Oracle {
 public:
  SvmObjectiveOracle(SvmLayout layout, Index first, Index count, double lambda)
      : layout_(layout), first_(first), count_(count), lambda_(lambda) {
    require(layout_.features >= 1 && layout_.total_samples >= 1, "svm-local: empty layout");
    require(first_ >= 0 && count_ >= 1 && first_ + count_ <= layout_.total_samples,
            "svm-local: sample range out of bounds");
    require(lambda_ > 0.0, "svm-local: lambda must be positive");
    weight_ = static_cast<double>(count_) / static_cast<double>(layout_.total_samples);
  }

  Index dimension() const override { return layout_.dimension(); }

  double evaluate(const Vector& x, Vector& g) const override {
    require_dim(x, dimension(), "svm-local objective");
    g.setZero(dimension());
    const auto w = x.head(layout_.features);
    g.head(layout_.features) = weight_ * w;
    g.segment(layout_.slack_index(first_), count_).setConstant(1.0 / lambda_);
    return value_unchecked(x);
  }

  double value(const Vector& x) const override {
    require_dim(x, dimension(), "svm-local objective");
    return value_unchecked(x);
  }

  json to_json() const override {
    return {{"type", "svm-local"},
            {"part", "objective"},
            {"features", layout_.features},
            {"total_samples", layout_.total_samples},
            {"first", first_},
            {"count", count_},
            {"lambda", lambda_}};
  }

 private:
  double value_unchecked(const Vector& x) const {
    return 0.5 * weight_ * x.head(layout_.features).squaredNorm() +
           x.segment(layout_.slack_index(first_), count_).sum() / lambda_;
  }

  SvmLayout layout_;
  Index first_;
  Index count_;
  double lambda_;
  double weight_ = 0.0;
};

class SvmMarginOracle final : public Oracle {
 public:
  SvmMarginOracle(SvmLayout layout, Index first, Matrix samples, Vector labels,
                  MarginAggregation aggregation)
      : layout_(layout),
        first_(first),
        U_(std::move(samples)),
        v_(std::move(labels)),
        aggregation_(aggregation) {
    require(U_.rows() >= 1, "svm-local margin: no samples");
    require(U_.rows() == v_.size(), "svm-local margin: samples and labels differ in count");
    require(U_.cols() == layout_.features, "svm-local margin: feature count mismatch");
    require(first_ >= 0 && first_ + U_.rows() <= layout_.total_samples,
            "svm-local margin: sample range out of bounds");
  }

  Index dimension() const override { return layout_.dimension(); }

  double evaluate(const Vector& x, Vector& g) const override {
    const Vector t = violations(x);
    g.setZero(dimension());
    if (aggregation_ == MarginAggregation::Max) {
      Index j = 0;
      const double v = t.maxCoeff(&j);
      add_piece(j, g);
      return v;
    }
    double total = 0.0;
    for (Index j = 0; j < t.size(); ++j) {
      if (t[j] > 0.0) {
        total += t[j];
        add_piece(j, g);
      }
    }
    return total;
  }

  double value(const Vector& x) const override {
    const Vector t = violations(x);
    if (aggregation_ == MarginAggregation::Max) return t.maxCoeff();
    return t.cwiseMax(0.0).sum();
  }

  json to_json() const override {
    return {{"type", "svm-local"},
            {"part", aggregation_ == MarginAggregation::Max ? "margin" : "margin-sum"},
            {"features", layout_.features},
            {"total_samples", layout_.total_samples},
            {"first", first_},
            {"U", json_io::from_matrix(U_)},
            {"v", json_io::from_vector(v_)}};
  }

 private:
  // 1 - z_j - v_j (w^T u_j + b) for every local sample j.
  Vector violations(const Vector& x) const {
    require_dim(x, dimension(), "svm-local margin");
    const auto w = x.head(layout_.features);
    const double b = x[layout_.bias_index()];
    Vector scores = U_ * w;
    scores.array() += b;
    return (1.0 - x.segment(layout_.slack_index(first_), U_.rows()).array() -
            v_.array() * scores.array())
        .matrix();
  }

  void add_piece(Index j, Vector& g) const {
    g.head(layout_.features) -= v_[j] * U_.row(j).transpose();
    g[layout_.bias_index()] -= v_[j];
    g[layout_.slack_index(first_ + j)] -= 1.0;
  }

  SvmLayout layout_;
  Index first_;
  Matrix U_;
  Vector v_;
  MarginAggregation aggregation_;
};

class FunctionOracle final : public Oracle {
 public:
  FunctionOracle(Index n, std::function<double(const Vector&, Vector&)> fn)
      : n_(n), fn_(std::move(fn)) {}

  Index dimension() const override { return n_; }

  double evaluate(const Vector& x, Vector& g) const override {
    require_dim(x, n_, "function oracle");
    const double v = fn_(x, g);
    if (g.size() != n_) throw ContractViolation("function oracle returned a subgradient of wrong size");
    return v;
  }

  json to_json() const override {
    throw ContractViolation("oracle built from a callable has no builtin-spec");
  }

 private:
  Index n_;
  std::function<double(const Vector&, Vector&)> fn_;
};

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

OraclePtr make_affine(Vector c, double c0) {
  return std::make_shared<AffineOracle>(std::move(c), c0);
}

OraclePtr make_quadratic(Matrix Q, Vector c, double c0) {
  return std::make_shared<QuadraticOracle>(std::move(Q), std::move(c), c0);
}

OraclePtr make_max_affine(Matrix G, Vector g) {
  return std::make_shared<MaxAffineOracle>(std::move(G), std::move(g));
}

OraclePtr make_constant(Index n, double value) { return make_affine(Vector::Zero(n), value); }

OraclePtr make_svm_objective(SvmLayout layout, Index first, Index count, double lambda) {
  return std::make_shared<SvmObjectiveOracle>(layout, first, count, lambda);
}

OraclePtr make_svm_margin(SvmLayout layout, Index first, Matrix samples, Vector labels,
                          MarginAggregation aggregation) {
  return std::make_shared<SvmMarginOracle>(layout, first, std::move(samples), std::move(labels),
                                           aggregation);
}

OraclePtr make_function_oracle(Index n, std::function<double(const Vector&, Vector&)> fn) {
  return std::make_shared<FunctionOracle>(n, std::move(fn));
}

OraclePtr oracle_from_json(const json& spec, Index n) {
  require(spec.is_object() && spec.contains("type"), "builtin-spec must be an object with a \"type\"");
  const auto type = spec.at("type").get<std::string>();
  try {
    if (type == "affine") {
      Vector c = json_io::to_vector(spec.at("c"), "affine.c");
      require(c.size() == n, "affine.c: expected " + std::to_string(n) + " entries");
      return make_affine(std::move(c), number_or(spec, "c0", 0.0));
    }
    if (type == "quadratic") {
      Vector c = spec.contains("c") ? json_io::to_vector(spec.at("c"), "quadratic.c") : Vector::Zero(n);
      require(c.size() == n, "quadratic.c: expected " + std::to_string(n) + " entries");
      Matrix Q = json_io::to_matrix(spec.at("Q"), n, "quadratic.Q");
      require(Q.rows() == n, "quadratic.Q: expected a square matrix");
      return make_quadratic(std::move(Q), std::move(c), number_or(spec, "c0", 0.0));
    }
    if (type == "hinge-max") {
      return make_max_affine(json_io::to_matrix(spec.at("G"), n, "hinge-max.G"),
                             json_io::to_vector(spec.at("g"), "hinge-max.g"));
    }
    if (type == "svm-local") {
      SvmLayout layout{spec.at("features").get<Index>(), spec.at("total_samples").get<Index>()};
      require(layout.dimension() == n, "svm-local: layout does not match problem dimension");
      const auto part = spec.at("part").get<std::string>();
      const Index first = spec.at("first").get<Index>();
      if (part == "objective") {
        return make_svm_objective(layout, first, spec.at("count").get<Index>(),
                                  spec.at("lambda").get<double>());
      }
      if (part == "margin" || part == "margin-sum") {
        return make_svm_margin(layout, first,
                               json_io::to_matrix(spec.at("U"), layout.features, "svm-local.U"),
                               json_io::to_vector(spec.at("v"), "svm-local.v"),
                               part == "margin" ? MarginAggregation::Max
                                                : MarginAggregation::SumOfHinges);
      }
      throw ContractViolation("svm-local: unknown part \"" + part + "\"");
    }
  } catch (const json::exception& e) {
    throw ContractViolation(type + " builtin-spec: " + e.what());
  }
  throw ContractViolation("unknown oracle family \"" + type + "\"");
}

}  // namespace airig
