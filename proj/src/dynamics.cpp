#include "oscbath/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "oscbath/error.hpp"

namespace oscbath {

double heisenberg_margin(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.rows() / 2);
  Eigen::MatrixXcd h = v.cast<std::complex<double>>();
  for (int k = 0; k < n; ++k) {
    h(2 * k, 2 * k + 1) += std::complex<double>(0.0, 0.5);
    h(2 * k + 1, 2 * k) -= std::complex<double>(0.0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

int packed_size(int n_modes) { return n_modes * (2 * n_modes + 1); }

int packed_index(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  return i * dim - i * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd pack_upper(const Eigen::MatrixXd& v) {
  const int dim = static_cast<int>(v.rows());
  Eigen::VectorXd x(dim * (dim + 1) / 2);
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) x(k++) = v(i, j);
  }
  return x;
}

Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& x, int dim) {
  Eigen::MatrixXd v(dim, dim);
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      v(i, j) = x(k);
      v(j, i) = x(k);
      ++k;
    }
  }
  return v;
}

DriftCoefficients drift_coefficients(double t, const SystemParams& params, const EffectiveFrequencies& freqs,
                                     const CoefficientTable& table) {
  const auto s = table.at(t);
  DriftCoefficients c;
  c.mass = params.mass;
  c.omega_f_sq = freqs.omega_f * freqs.omega_f;
  c.omega_bar_sq = freqs.omega_n * freqs.omega_n + s.omega_shift_sq + table.counterterm();
  c.gamma = 2.0 * s.gamma_n;
  c.f_n = s.f_n;
  c.d_n = s.d_n;
  return c;
}

namespace {

Eigen::MatrixXd drift_from(const DriftCoefficients& c, int n_modes) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    a(2 * k, 2 * k + 1) = 1.0 / c.mass;
    a(2 * k + 1, 2 * k) = -c.mass * c.omega_f_sq;
  }
  const int q = 2 * n_modes - 2;
  a(q + 1, q) = -c.mass * c.omega_bar_sq;
  a(q + 1, q + 1) = -c.gamma;
  return a;
}

// Writes the block coefficients row-major into m (up to 4×4).
void fill_block(BlockKind kind, const DriftCoefficients& c, double m[4][4]) {
  const double inv_m = 1.0 / c.mass;
  const double wf = c.mass * c.omega_f_sq;
  const double wn = c.mass * c.omega_bar_sq;
  const double g = c.gamma;
  for (int i = 0; i < 4; ++i) std::fill(m[i], m[i] + 4, 0.0);
  switch (kind) {
    case BlockKind::A1:
      m[0][1] = 2.0 * inv_m;
      m[1][0] = -wf;
      m[1][2] = inv_m;
      m[2][1] = -2.0 * wf;
      break;
    case BlockKind::A2:
      m[0][1] = 2.0 * inv_m;
      m[1][0] = -wn;
      m[1][1] = -g;
      m[1][2] = inv_m;
      m[2][1] = -2.0 * wn;
      m[2][2] = -2.0 * g;
      break;
    case BlockKind::A3:
      m[0][1] = inv_m;
      m[0][2] = inv_m;
      m[1][0] = -wn;
      m[1][1] = -g;
      m[1][3] = inv_m;
      m[2][0] = -wf;
      m[2][3] = inv_m;
      m[3][1] = -wf;
      m[3][2] = -wn;
      m[3][3] = -g;
      break;
    case BlockKind::A4:
      m[0][1] = inv_m;
      m[0][2] = inv_m;
      m[1][0] = -wf;
      m[1][3] = inv_m;
      m[2][0] = -wf;
      m[2][3] = inv_m;
      m[3][1] = -wf;
      m[3][2] = -wf;
      break;
  }
}

int block_size(BlockKind kind) { return (kind == BlockKind::A1 || kind == BlockKind::A2) ? 3 : 4; }

}  // namespace

Eigen::MatrixXd drift_matrix(double t, const SystemParams& params, const EffectiveFrequencies& freqs,
                             const CoefficientTable& table) {
  return drift_from(drift_coefficients(t, params, freqs, table), params.n_modes);
}

Eigen::MatrixXd diffusion_matrix(double t, int n_modes, const CoefficientTable& table) {
  const auto s = table.at(t);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  const int q = 2 * n_modes - 2;
  d(q, q + 1) = -s.f_n;
  d(q + 1, q) = -s.f_n;
  d(q + 1, q + 1) = 2.0 * s.d_n;
  return d;
}

const char* to_string(BlockKind kind) noexcept {
  switch (kind) {
    case BlockKind::A1: return "A1";
    case BlockKind::A2: return "A2";
    case BlockKind::A3: return "A3";
    case BlockKind::A4: return "A4";
  }
  return "?";
}

Eigen::MatrixXd block_matrix(BlockKind kind, const DriftCoefficients& c) {
  double m[4][4];
  fill_block(kind, c, m);
  const int n = block_size(kind);
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = m[i][j];
  }
  return out;
}

BlockSystem::BlockSystem(int n_modes, std::vector<Block> blocks) : n_modes_(n_modes), blocks_(std::move(blocks)) {}

int BlockSystem::dimension() const noexcept {
  int total = 0;
  for (const auto& b : blocks_) total += static_cast<int>(b.packed.size());
  return total;
}

int BlockSystem::count(BlockKind kind) const noexcept {
  return static_cast<int>(std::count_if(blocks_.begin(), blocks_.end(), [&](const Block& b) { return b.kind == kind; }));
}

void BlockSystem::derivative(const Eigen::VectorXd& x, const DriftCoefficients& c, Eigen::VectorXd& dx) const {
  double m[4][4][4];
  fill_block(BlockKind::A1, c, m[0]);
  fill_block(BlockKind::A2, c, m[1]);
  fill_block(BlockKind::A3, c, m[2]);
  fill_block(BlockKind::A4, c, m[3]);
  dx.resize(x.size());
  for (const auto& b : blocks_) {
    const auto& mat = m[static_cast<int>(b.kind)];
    const int n = static_cast<int>(b.packed.size());
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += mat[i][j] * x(b.packed[j]);
      dx(b.packed[i]) = acc;
    }
  }
  const int dim = 2 * n_modes_;
  dx(packed_index(dim - 2, dim - 1, dim)) -= c.f_n;
  dx(packed_index(dim - 1, dim - 1, dim)) += 2.0 * c.d_n;
}

BlockSystem build_block_system(const SystemParams& params) {
  if (params.n_modes < 2) throw Error(Errc::invalid_mode_count, "block system needs n_modes >= 2");
  const int n = params.n_modes;
  const int dim = 2 * n;
  const int size = packed_size(n);

  // Generic, mutually distinct probe coefficients so that every template
  // entry is identifiable.
  DriftCoefficients probe;
  probe.mass = 1.37;
  probe.omega_f_sq = 0.71;
  probe.omega_bar_sq = 2.93;
  probe.gamma = 0.389;
  const Eigen::MatrixXd a = drift_from(probe, n);

  // Packed Lyapunov operator L(x) = pack(A V + V Aᵀ), stored by column
  // since each element couples to at most four others.
  std::vector<std::vector<std::pair<int, double>>> op(static_cast<std::size_t>(size));
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      const Eigen::MatrixXd av = a * e;
      const Eigen::VectorXd col = pack_upper(av + av.transpose());
      auto& entries = op[static_cast<std::size_t>(packed_index(i, j, dim))];
      for (int r = 0; r < size; ++r) {
        if (col(r) != 0.0) entries.emplace_back(r, col(r));
      }
    }
  }
  auto op_at = [&](int r, int c) {
    for (const auto& [row, value] : op[static_cast<std::size_t>(c)]) {
      if (row == r) return value;
    }
    return 0.0;
  };

  // Connected components of the coupling graph.
  std::vector<int> parent(static_cast<std::size_t>(size));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  for (int c = 0; c < size; ++c) {
    for (const auto& entry : op[static_cast<std::size_t>(c)]) parent[find(entry.first)] = find(c);
  }
  std::vector<std::vector<int>> components;
  std::vector<int> slot(static_cast<std::size_t>(size), -1);
  for (int k = 0; k < size; ++k) {
    const int root = find(k);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[slot[root]].push_back(k);
  }

  std::vector<std::pair<int, int>> unpacked;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) unpacked.emplace_back(i, j);
  }

  std::vector<Block> blocks;
  for (auto& comp : components) {
    bool matched = false;
    for (BlockKind kind : {BlockKind::A1, BlockKind::A2, BlockKind::A3, BlockKind::A4}) {
      if (block_size(kind) != static_cast<int>(comp.size())) continue;
      const Eigen::MatrixXd tmpl = block_matrix(kind, probe);
      std::vector<int> perm = comp;
      std::sort(perm.begin(), perm.end());
      do {
        bool equal = true;
        for (std::size_t r = 0; r < perm.size() && equal; ++r) {
          for (std::size_t c = 0; c < perm.size() && equal; ++c) {
            equal = std::abs(op_at(perm[r], perm[c]) - tmpl(static_cast<int>(r), static_cast<int>(c))) < 1e-12;
          }
        }
        if (equal) {
          Block b;
          b.kind = kind;
          b.packed = perm;
          for (int k : perm) b.elements.push_back(unpacked[static_cast<std::size_t>(k)]);
          b.mode_a = b.elements.front().first / 2;
          b.mode_b = b.elements.front().second / 2;
          blocks.push_back(std::move(b));
          matched = true;
          break;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (matched) break;
    }
    if (!matched) throw std::logic_error("covariance equations contain a block matching no known template");
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) {
    return std::pair(x.mode_a, x.mode_b) < std::pair(y.mode_a, y.mode_b);
  });
  return BlockSystem(n, std::move(blocks));
}

Trajectory evolve(const CovarianceState& v0, const SystemParams& params, const CoefficientTable& table,
                  const EvolveOptions& options) {
  if (v0.basis != Basis::transformed) throw Error(Errc::basis_mismatch, "evolve expects a transformed-basis state");
  if (v0.n_modes() != params.n_modes || v0.matrix.cols() != v0.matrix.rows()) {
    throw Error(Errc::invalid_parameter, "initial covariance does not match n_modes");
  }
  const auto freqs = effective_frequencies(params);
  const double step_limit = 0.05 / std::max(freqs.omega_n, freqs.omega_f);
  if (!(options.dt > 0.0) || options.dt > step_limit) {
    throw Error(Errc::step_too_large, fmt::format("dt={} must lie in (0, {}]", options.dt, step_limit));
  }
  if (options.stride < 1) throw Error(Errc::invalid_parameter, "stride must be >= 1");
  const double t0 = v0.time;
  if (options.t_max < t0) throw Error(Errc::invalid_parameter, "t_max precedes the initial time");
  if (options.t_max > table.t_max() * (1.0 + 1e-12)) {
    throw Error(Errc::time_out_of_range,
                fmt::format("t_max={} exceeds the coefficient table range {}", options.t_max, table.t_max()));
  }

  const int n = params.n_modes;
  const int dim = 2 * n;
  const double span = options.t_max - t0;
  const auto steps = static_cast<long long>(std::ceil(span / options.dt - 1e-9));

  Trajectory out;
  out.states.reserve(static_cast<std::size_t>(steps / options.stride + 2));
  auto record = [&](double t, const Eigen::MatrixXd& v) {
    out.states.push_back({t, v, Basis::transformed});
    if (options.check_physicality) {
      const double margin = heisenberg_margin(v);
      out.worst_margin = std::min(out.worst_margin, margin);
      if (margin < -1e-9 && !out.nonphysical) {
        out.nonphysical = true;
        out.warnings.push_back(fmt::format("Heisenberg bound violated at t={:.6g} (margin {:.3e})", t, margin));
      }
    }
  };

  if (options.engine == Engine::lyapunov) {
    auto rhs = [&](double t, const Eigen::MatrixXd& v) {
      const auto c = drift_coefficients(t, params, freqs, table);
      const Eigen::MatrixXd av = drift_from(c, n) * v;
      Eigen::MatrixXd dv = av + av.transpose();
      dv(dim - 2, dim - 1) -= c.f_n;
      dv(dim - 1, dim - 2) -= c.f_n;
      dv(dim - 1, dim - 1) += 2.0 * c.d_n;
      return dv;
    };
    Eigen::MatrixXd v = v0.matrix;
    record(t0, v);
    for (long long k = 0; k < steps; ++k) {
      const double t = t0 + static_cast<double>(k) * options.dt;
      const double t_next = (k + 1 == steps) ? options.t_max : t0 + static_cast<double>(k + 1) * options.dt;
      const double h = t_next - t;
      const Eigen::MatrixXd k1 = rhs(t, v);
      const Eigen::MatrixXd k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
      const Eigen::MatrixXd k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
      const Eigen::MatrixXd k4 = rhs(t_next, v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if ((k + 1) % options.stride == 0 || k + 1 == steps) record(t_next, v);
    }
  } else {
    const BlockSystem system = build_block_system(params);
    auto rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      system.derivative(x, drift_coefficients(t, params, freqs, table), dx);
    };
    Eigen::VectorXd x = pack_upper(v0.matrix);
    Eigen::VectorXd k1, k2, k3, k4;
    record(t0, v0.matrix);
    for (long long k = 0; k < steps; ++k) {
      const double t = t0 + static_cast<double>(k) * options.dt;
      const double t_next = (k + 1 == steps) ? options.t_max : t0 + static_cast<double>(k + 1) * options.dt;
      const double h = t_next - t;
      rhs(t, x, k1);
      rhs(t + 0.5 * h, x + 0.5 * h * k1, k2);
      rhs(t + 0.5 * h, x + 0.5 * h * k2, k3);
      rhs(t_next, x + h * k3, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if ((k + 1) % options.stride == 0 || k + 1 == steps) record(t_next, unpack_upper(x, dim));
    }
  }
  return out;
}

std::vector<double> constants_of_motion(const CovarianceState& v, const EffectiveFrequencies& freqs, double mass) {
  if (v.basis != Basis::transformed) {
    throw Error(Errc::basis_mismatch, "constants of motion are defined in the transformed basis");
  }
  const int free_modes = v.n_modes() - 1;
  const double wf = mass * freqs.omega_f * freqs.omega_f;
  const auto& m = v.matrix;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(free_modes * free_modes));
  for (int a = 0; a < free_modes; ++a) {
    out.push_back(wf * m(2 * a, 2 * a) + m(2 * a + 1, 2 * a + 1) / mass);
    for (int b = a + 1; b < free_modes; ++b) {
      out.push_back(m(2 * a, 2 * b + 1) - m(2 * a + 1, 2 * b));
      out.push_back(wf * m(2 * a, 2 * b) + m(2 * a + 1, 2 * b + 1) / mass);
    }
  }
  return out;
}

std::pair<double, double> analytic_free_block(double t, double v_minus_0, double v12_0, double omega_f) {
  const double c = std::cos(2.0 * omega_f * t);
  const double s = std::sin(2.0 * omega_f * t);
  return {v_minus_0 * c + 2.0 * omega_f * v12_0 * s, v12_0 * c - v_minus_0 / (2.0 * omega_f) * s};
}

std::pair<double, double> FreeBlockSolution::at(double t) const {
  return analytic_free_block(t, v_minus_0, v12_0, omega_f);
}

Eigen::Vector3d FreeBlockSolution::elements(double t) const {
  const auto [v_minus, v12] = at(t);
  const double wf = mass * omega_f * omega_f;
  return {(v_plus + v_minus) / (2.0 * wf), v12, 0.5 * mass * (v_plus - v_minus)};
}

FreeBlockSolution free_block_solution(const CovarianceState& v, int mode, const EffectiveFrequencies& freqs,
                                      double mass) {
  if (v.basis != Basis::transformed) throw Error(Errc::basis_mismatch, "free block needs the transformed basis");
  if (mode < 0 || mode >= v.n_modes() - 1) {
    throw Error(Errc::index_error, fmt::format("mode {} is not a relaxation-free mode", mode));
  }
  const double wf = mass * freqs.omega_f * freqs.omega_f;
  const double vqq = v.matrix(2 * mode, 2 * mode);
  const double vpp = v.matrix(2 * mode + 1, 2 * mode + 1);
  return {wf * vqq + vpp / mass, wf * vqq - vpp / mass, v.matrix(2 * mode, 2 * mode + 1), freqs.omega_f, mass};
}

Eigen::MatrixXd stationary_average(const Trajectory& trajectory, double omega_f) {
  if (trajectory.states.empty()) throw Error(Errc::invalid_parameter, "empty trajectory");
  const double t_end = trajectory.states.back().time;
  const double window = 5.0 * std::numbers::pi / omega_f;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(trajectory.states.back().matrix.rows(),
                                               trajectory.states.back().matrix.cols());
  int count = 0;
  for (const auto& s : trajectory.states) {
    if (s.time >= t_end - window) {
      sum += s.matrix;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.states.empty()) return;
  const int dim = static_cast<int>(trajectory.states.front().matrix.rows());
  out << "t";
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) out << fmt::format(",V_{}_{}", i + 1, j + 1);
  }
  out << '\n';
  for (const auto& s : trajectory.states) {
    out << fmt::format("{:.10g}", s.time);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) out << fmt::format(",{:.16e}", s.matrix(i, j));
    }
    out << '\n';
  }
}

}  // namespace oscbath
