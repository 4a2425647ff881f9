#include "airig/problem.hpp"

#include "airig/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace airig {

BoxSet::BoxSet(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), "box: lower and upper differ in length");
  for (Index j = 0; j < lower_.size(); ++j) {
    require(std::isfinite(lower_[j]) && std::isfinite(upper_[j]),
            "box: bounds must be finite (component " + std::to_string(j) + ")");
    require(lower_[j] <= upper_[j], "box: lower > upper at component " + std::to_string(j));
  }
}

BoxSet BoxSet::cube(Index n, double radius) {
  require(radius > 0.0, "box radius must be positive");
  return BoxSet(Vector::Constant(n, -radius), Vector::Constant(n, radius));
}

bool BoxSet::contains(const Vector& x) const {
  return x.size() == lower_.size() && (x.array() >= lower_.array()).all() &&
         (x.array() <= upper_.array()).all();
}

Vector BoxSet::farthest_corner() const {
  Vector c(lower_.size());
  for (Index j = 0; j < c.size(); ++j) {
    c[j] = std::abs(lower_[j]) >= std::abs(upper_[j]) ? lower_[j] : upper_[j];
  }
  return c;
}

Vector project_box(const BoxSet& box, const Vector& z) {
  require_dim(z, box.dimension(), "project_box");
  return z.cwiseMax(box.lower()).cwiseMin(box.upper());
}

void project_box_inplace(const BoxSet& box, Vector& z) {
  z = z.cwiseMax(box.lower()).cwiseMin(box.upper());
}

std::string to_string(PhiMode mode) { return mode == PhiMode::Hinge ? "hinge" : "product"; }

PhiMode phi_mode_from_string(const std::string& s) {
  if (s == "hinge") return PhiMode::Hinge;
  if (s == "product") return PhiMode::Product;
  throw ContractViolation("unknown phi_mode \"" + s + "\" (expected hinge or product)");
}

ProblemSpec::ProblemSpec(Index n, std::vector<AgentBlock> blocks, BoxSet box,
                         std::vector<Index> nonneg, PhiMode mode)
    : n_(n), blocks_(std::move(blocks)), box_(std::move(box)), nonneg_(std::move(nonneg)), mode_(mode) {
  require(n_ >= 1, "problem: dimension must be positive");
  require(!blocks_.empty(), "problem: at least one agent block is required");
  require(box_.dimension() == n_, "problem: box dimension mismatch");
  std::sort(nonneg_.begin(), nonneg_.end());
  nonneg_.erase(std::unique(nonneg_.begin(), nonneg_.end()), nonneg_.end());
  for (Index j : nonneg_) require(j >= 0 && j < n_, "problem: J index out of range");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto& blk = blocks_[i];
    const std::string tag = "problem: block " + std::to_string(i);
    require(blk.f && blk.h, tag + " is missing an oracle");
    require(blk.f->dimension() == n_ && blk.h->dimension() == n_, tag + " oracle dimension mismatch");
    if (blk.A.size() == 0 && blk.b.size() == 0) blk.A.resize(0, n_);
    require(blk.A.cols() == n_, tag + ": A must have n columns");
    require(blk.A.rows() == blk.b.size(), tag + ": A and b row counts differ");
  }
}

ProblemSpec ProblemSpec::with_phi_mode(PhiMode mode) const {
  ProblemSpec copy = *this;
  copy.mode_ = mode;
  return copy;
}

Index ProblemSpec::equality_rows() const {
  Index p = 0;
  for (const auto& blk : blocks_) p += blk.A.rows();
  return p;
}

Matrix ProblemSpec::stacked_A() const {
  Matrix A(equality_rows(), n_);
  Index row = 0;
  for (const auto& blk : blocks_) {
    A.middleRows(row, blk.A.rows()) = blk.A;
    row += blk.A.rows();
  }
  return A;
}

Vector ProblemSpec::stacked_b() const {
  Vector b(equality_rows());
  Index row = 0;
  for (const auto& blk : blocks_) {
    b.segment(row, blk.b.size()) = blk.b;
    row += blk.b.size();
  }
  return b;
}

double ProblemSpec::objective(const Vector& x) const {
  require_dim(x, n_, "objective");
  double total = 0.0;
  for (const auto& blk : blocks_) total += blk.f->value(x);
  return total;
}

namespace {

double nonneg_violation(const Vector& x, std::span<const Index> nonneg) {
  double s = 0.0;
  for (Index j : nonneg) s += std::max(-x[j], 0.0);
  return s;
}

}  // namespace

double eval_phi_agent(const AgentBlock& block, const Vector& x, std::span<const Index> nonneg,
                      Index m, PhiMode mode) {
  require_dim(x, block.A.cols(), "eval_phi_agent");
  require(m >= 1, "eval_phi_agent: m must be positive");
  double value = block.A.rows() > 0 ? 0.5 * (block.A * x - block.b).squaredNorm() : 0.0;
  const double hplus = std::max(block.h->value(x), 0.0);
  value += mode == PhiMode::Hinge ? hplus : 0.5 * hplus * hplus;
  value += nonneg_violation(x, nonneg) / static_cast<double>(m);
  return value;
}

double eval_phi_total(const ProblemSpec& problem, const Vector& x) {
  require_dim(x, problem.dimension(), "eval_phi_total");
  double total = 0.0;
  for (const auto& blk : problem.blocks()) {
    total += eval_phi_agent(blk, x, problem.nonneg(), problem.agents(), problem.phi_mode());
  }
  return total;
}

void subgrad_phi_agent_into(const AgentBlock& block, const Vector& x,
                            std::span<const Index> nonneg, Index m, PhiMode mode, Vector& out,
                            Vector& scratch) {
  require_dim(x, block.A.cols(), "subgrad_phi_agent");
  if (block.A.rows() > 0) {
    out.noalias() = block.A.transpose() * (block.A * x - block.b);
  } else {
    out.setZero(x.size());
  }
  const double hv = block.h->evaluate(x, scratch);
  if (hv > 0.0) {
    // h == 0 falls through: zero is in the subdifferential for both modes.
    out += (mode == PhiMode::Hinge ? 1.0 : hv) * scratch;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Index j : nonneg) {
    if (x[j] < 0.0) out[j] -= inv_m;
  }
}

Vector subgrad_phi_agent(const AgentBlock& block, const Vector& x, std::span<const Index> nonneg,
                         Index m, PhiMode mode) {
  require(m >= 1, "subgrad_phi_agent: m must be positive");
  Vector out;
  Vector scratch;
  subgrad_phi_agent_into(block, x, nonneg, m, mode, out, scratch);
  return out;
}

nlohmann::json BoundEstimates::to_json() const {
  return {{"C", C}, {"C_f", C_f}, {"M", M}, {"M_f", M_f}};
}

BoundEstimates BoundEstimates::from_json(const nlohmann::json& j) {
  return {j.at("C").get<double>(), j.at("C_f").get<double>(), j.at("M").get<double>(),
          j.at("M_f").get<double>()};
}

BoundEstimates estimate_bounds(const ProblemSpec& problem, std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, "estimate_bounds: samples must be >= 1");
  const Index n = problem.dimension();
  const Index m = problem.agents();
  const BoxSet& box = problem.box();

  std::vector<Vector> points;
  points.reserve(samples + 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    Vector x(n);
    for (Index j = 0; j < n; ++j) {
      x[j] = box.lower()[j] + unit(rng) * (box.upper()[j] - box.lower()[j]);
    }
    points.push_back(std::move(x));
  }
  if (n <= 12) {
    const std::uint64_t corners = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < corners; ++mask) {
      Vector x(n);
      for (Index j = 0; j < n; ++j) x[j] = (mask >> j) & 1U ? box.upper()[j] : box.lower()[j];
      points.push_back(std::move(x));
    }
  } else {
    points.push_back(box.farthest_corner());
  }

  double sum_phi = 0.0, agent_phi = 0.0, sum_f = 0.0, agent_f = 0.0, norm_x = 0.0, abs_f = 0.0;
  Vector g, scratch;
  for (const auto& x : points) {
    double sp = 0.0, sf = 0.0, fx = 0.0;
    for (const auto& blk : problem.blocks()) {
      subgrad_phi_agent_into(blk, x, problem.nonneg(), m, problem.phi_mode(), g, scratch);
      const double gp = g.norm();
      sp += gp;
      agent_phi = std::max(agent_phi, gp);
      fx += blk.f->evaluate(x, g);
      const double gf = g.norm();
      sf += gf;
      agent_f = std::max(agent_f, gf);
    }
    sum_phi = std::max(sum_phi, sp);
    sum_f = std::max(sum_f, sf);
    norm_x = std::max(norm_x, x.norm());
    abs_f = std::max(abs_f, std::abs(fx));
  }

  const double md = static_cast<double>(m);
  auto inflate = [](double v) { return std::max(kBoundSafetyFactor * v, kBoundFloor); };
  BoundEstimates est;
  // Both the aggregate and the per-agent (C/m) bound must hold.
  est.C = inflate(std::max(sum_phi, md * agent_phi));
  est.C_f = inflate(std::max(sum_f, md * agent_f));
  est.M = inflate(norm_x);
  est.M_f = inflate(abs_f);
  return est;
}

ProblemSpec problem_from_json(const nlohmann::json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    require(n >= 1, "problem: n must be positive");
    std::vector<Index> nonneg;
    if (j.contains("J")) nonneg = j.at("J").get<std::vector<Index>>();
    const auto& jb = j.at("box");
    BoxSet box(json_io::to_vector(jb.at("lower"), "box.lower"),
               json_io::to_vector(jb.at("upper"), "box.upper"));
    std::vector<AgentBlock> blocks;
    for (const auto& blk : j.at("blocks")) {
      AgentBlock b;
      b.A = blk.contains("A") ? json_io::to_matrix(blk.at("A"), n, "block.A") : Matrix(0, n);
      b.b = blk.contains("b") ? json_io::to_vector(blk.at("b"), "block.b") : Vector(0);
      b.f = oracle_from_json(blk.at("f"), n);
      b.h = blk.contains("h") ? oracle_from_json(blk.at("h"), n) : make_constant(n, -1.0);
      blocks.push_back(std::move(b));
    }
    const PhiMode mode =
        j.contains("phi_mode") ? phi_mode_from_string(j.at("phi_mode").get<std::string>()) : PhiMode::Hinge;
    return ProblemSpec(n, std::move(blocks), std::move(box), std::move(nonneg), mode);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("problem file: ") + e.what());
  }
}

nlohmann::json problem_to_json(const ProblemSpec& problem) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& blk : problem.blocks()) {
    blocks.push_back({{"A", json_io::from_matrix(blk.A)},
                      {"b", json_io::from_vector(blk.b)},
                      {"f", blk.f->to_json()},
                      {"h", blk.h->to_json()}});
  }
  return {{"n", problem.dimension()},
          {"J", std::vector<Index>(problem.nonneg().begin(), problem.nonneg().end())},
          {"box",
           {{"lower", json_io::from_vector(problem.box().lower())},
            {"upper", json_io::from_vector(problem.box().upper())}}},
          {"phi_mode", to_string(problem.phi_mode())},
          {"blocks", std::move(blocks)}};
}

}  // namespace airig
