#include "airig/svm.hpp"

#include "airig/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace airig {

SvmDataset generate_data(Index N, Index n, double separation, double flip_prob, std::uint64_t seed) {
  require(N >= 2, "generate_data: N must be >= 2");
  require(n >= 1, "generate_data: n must be >= 1");
  require(flip_prob >= 0.0 && flip_prob < 0.5, "generate_data: flip_prob must lie in [0, 0.5)");
  require(std::isfinite(separation), "generate_data: separation must be finite");

  SvmDataset data;
  data.seed = seed;
  data.U.resize(N, n);
  data.v.resize(N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution flip(flip_prob);
  for (Index i = 0; i < N; ++i) {
    const double label = i % 2 == 0 ? 1.0 : -1.0;
    for (Index j = 0; j < n; ++j) data.U(i, j) = noise(rng);
    data.U(i, 0) += 0.5 * separation * label;
    data.v[i] = flip(rng) ? -label : label;
  }
  return data;
}

void write_dataset_csv(const SvmDataset& data, const std::string& path) {
  std::string out;
  char buf[40];
  for (Index i = 0; i < data.samples(); ++i) {
    for (Index j = 0; j < data.features(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.U(i, j));
      out += buf;
    }
    out += data.v[i] > 0.0 ? "1\n" : "-1\n";
  }
  json_io::write_file_atomic(path, out);
}

SvmDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ContractViolation(path + ":" + std::to_string(lineno) + ": bad number \"" + cell + "\"");
      }
      row.push_back(v);
    }
    if (row.size() < 2) throw ContractViolation(path + ":" + std::to_string(lineno) + ": need features and a label");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ContractViolation(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    if (row.back() != 1.0 && row.back() != -1.0) {
      throw ContractViolation(path + ":" + std::to_string(lineno) + ": label must be -1 or 1");
    }
    rows.push_back(std::move(row));
  }
  require(rows.size() >= 2, path + ": need at least two samples");
  SvmDataset data;
  const Index N = static_cast<Index>(rows.size());
  const Index n = static_cast<Index>(rows.front().size()) - 1;
  data.U.resize(N, n);
  data.v.resize(N);
  for (Index i = 0; i < N; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) data.U(i, j) = r[static_cast<std::size_t>(j)];
    data.v[i] = r.back();
  }
  return data;
}

double default_box_radius(Index N, double lambda) {
  require(N >= 1 && lambda > 0.0, "default_box_radius: bad N or lambda");
  return 10.0 * (1.0 + std::sqrt(2.0 * static_cast<double>(N) / lambda));
}

double SvmInstance::objective(const Vector& x) const {
  require_dim(x, dimension(), "svm objective");
  return 0.5 * x.head(layout.features).squaredNorm() + x.tail(layout.total_samples).sum() / lambda;
}

nlohmann::json SvmInstance::to_json() const {
  return {{"lambda", lambda},
          {"m", m},
          {"box_radius", box_radius},
          {"h_mode", aggregation == MarginAggregation::Max ? "max" : "sum"},
          {"seed", dataset.seed},
          {"problem", problem_to_json(problem)},
          {"polyhedron", polyhedron.to_json()}};
}

SvmInstance build_instance(const SvmDataset& dataset, double lambda, Index m,
                           std::optional<double> box_radius, MarginAggregation aggregation) {
  const Index N = dataset.samples();
  const Index n = dataset.features();
  require(N >= 1 && n >= 1, "build_instance: empty dataset");
  require(dataset.v.size() == N, "build_instance: label count mismatch");
  for (Index i = 0; i < N; ++i) {
    require(dataset.v[i] == 1.0 || dataset.v[i] == -1.0, "build_instance: labels must be -1 or 1");
  }
  require(lambda > 0.0, "build_instance: lambda must be positive");
  require(m >= 1, "build_instance: m must be >= 1");
  if (m > N) {
    throw ContractViolation("build_instance: m = " + std::to_string(m) + " exceeds N = " + std::to_string(N));
  }

  SvmInstance inst;
  inst.dataset = dataset;
  inst.lambda = lambda;
  inst.m = m;
  inst.layout = {n, N};
  inst.aggregation = aggregation;
  inst.box_radius = box_radius && *box_radius > 0.0 ? *box_radius : default_box_radius(N, lambda);
  require(std::isfinite(inst.box_radius), "build_instance: box radius must be finite");

  const Index dim = inst.layout.dimension();
  const Index base = N / m;
  std::vector<AgentBlock> blocks;
  for (Index i = 0; i < m; ++i) {
    const Index first = i * base;
    const Index count = i + 1 == m ? N - first : base;
    inst.agent_samples.emplace_back(first, count);
    AgentBlock blk;
    blk.f = make_svm_objective(inst.layout, first, count, lambda);
    blk.h = make_svm_margin(inst.layout, first, dataset.U.middleRows(first, count),
                            dataset.v.segment(first, count), aggregation);
    blk.A.resize(0, dim);
    blk.b.resize(0);
    blocks.push_back(std::move(blk));
  }
  std::vector<Index> J;
  for (Index j = 0; j < N; ++j) J.push_back(inst.layout.slack_index(j));
  inst.problem = ProblemSpec(dim, std::move(blocks), BoxSet::cube(dim, inst.box_radius), std::move(J));

  // -v_j u_j^T w - v_j b - z_j <= -1 and -z_j <= 0.
  RowMatrix C = RowMatrix::Zero(2 * N, dim);
  Vector d(2 * N);
  for (Index j = 0; j < N; ++j) {
    C.row(j).head(n) = -dataset.v[j] * dataset.U.row(j);
    C(j, inst.layout.bias_index()) = -dataset.v[j];
    C(j, inst.layout.slack_index(j)) = -1.0;
    d[j] = -1.0;
    C(N + j, inst.layout.slack_index(j)) = -1.0;
    d[N + j] = 0.0;
  }
  inst.polyhedron = PolyhedralSet(std::move(C), std::move(d), RowMatrix(0, dim), Vector(0));
  return inst;
}

ReferenceOptimum reference_optimum(const SvmInstance& instance, double tol) {
  const Index dim = instance.dimension();
  const Index n = instance.layout.features;
  Matrix Q = Matrix::Zero(dim, dim);
  Q.topLeftCorner(n, n).setIdentity();
  Vector c = Vector::Zero(dim);
  c.tail(instance.layout.total_samples).setConstant(1.0 / instance.lambda);
  const QpSolution sol = solve_qp(Q, c, instance.polyhedron, tol);
  ReferenceOptimum out;
  out.x = sol.x;
  out.f = instance.objective(sol.x);
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  return out;
}

void validate_box_interior(const SvmInstance& instance, const Vector& x) {
  require_dim(x, instance.dimension(), "validate_box_interior");
  const double extent = x.cwiseAbs().maxCoeff();
  if (!(extent < instance.box_radius)) {
    throw ContractViolation("reference optimum reaches |x|_inf = " + std::to_string(extent) +
                            ", not inside the box of radius " + std::to_string(instance.box_radius));
  }
}

}  // namespace airig
