#include "privsynth/sdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "privsynth/errors.hpp"

namespace privsynth::sdp {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::MaxIter:
      return "max_iter";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

using CoordMap = std::map<Index, MatrixXd>;

// Affine symmetric block F0 + sum_k y[active[k]] F_k over the reduced coordinates.
struct Block {
  std::string name;
  Index m = 0;
  MatrixXd F0;  // floor already subtracted
  std::vector<Index> active;
  MatrixXd F;  // m x (m * active.size())
  double floor = 0.0;
  double weight = 1.0;
};

struct System {
  Index dim = 0;
  VectorXd c;
  double c0 = 0.0;
  std::vector<Block> logdets;
  std::vector<Block> barriers;
  double order = 0.0;
};

// x = xp + N y.
struct Reduction {
  VectorXd xp;
  MatrixXd N;
  bool identity = true;
};

struct Layout {
  std::vector<Index> offset;
  Index n = 0;
};

Layout make_layout(const Problem& p) {
  Layout l;
  for (const auto& v : p.variables()) {
    l.offset.push_back(l.n);
    l.n += coordinate_count(v);
  }
  return l;
}

struct Expanded {
  MatrixXd F0;
  CoordMap F;
};

Expanded expand(const AffineExpr& e, const Layout& layout) {
  Expanded out{e.constant(), {}};
  for (const auto& t : e.terms()) {
    const Variable& v = t.var;
    Index k = layout.offset[static_cast<std::size_t>(v.id)];
    auto add = [&](Index a, Index b) {
      if (t.transposed) std::swap(a, b);
      auto it = out.F.find(k);
      if (it == out.F.end()) it = out.F.emplace(k, MatrixXd::Zero(e.rows(), e.cols())).first;
      it->second.noalias() += t.left.col(a) * t.right.row(b);
    };
    for (Index c = 0; c < v.cols; ++c) {
      const Index r0 = v.structure == Structure::Symmetric ? c : 0;
      for (Index r = r0; r < v.rows; ++r) {
        if (!entry_is_free(v, r, c)) continue;
        add(r, c);
        if (v.structure == Structure::Symmetric && r != c) add(c, r);
        ++k;
      }
    }
  }
  for (auto it = out.F.begin(); it != out.F.end();) {
    it = it->second.cwiseAbs().maxCoeff() == 0.0 ? out.F.erase(it) : std::next(it);
  }
  return out;
}

void require_symmetric(Expanded& e, const std::string& name) {
  auto check = [&](MatrixXd& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument(fmt::format("'{}' is not a symmetric affine expression", name));
    }
    m = 0.5 * (m + m.transpose());
  };
  check(e.F0);
  for (auto& [k, m] : e.F) check(m);
}

Reduction reduce_equalities(const Problem& p, const Layout& layout, const VectorXd& x0, std::string& failure) {
  Reduction red;
  red.xp = x0;
  std::vector<std::pair<VectorXd, double>> rows;
  for (const auto& eq : p.equalities()) {
    const auto ex = expand(eq.expr, layout);
    for (Index c = 0; c < eq.expr.cols(); ++c) {
      for (Index r = 0; r < eq.expr.rows(); ++r) {
        VectorXd row = VectorXd::Zero(layout.n);
        for (const auto& [k, m] : ex.F) row(k) = m(r, c);
        rows.emplace_back(std::move(row), ex.F0(r, c));
      }
    }
  }
  if (rows.empty()) {
    red.N = MatrixXd::Identity(layout.n, layout.n);
    return red;
  }
  red.identity = false;
  const Index q = static_cast<Index>(rows.size());
  MatrixXd E(q, layout.n);
  VectorXd f(q);
  for (Index i = 0; i < q; ++i) {
    E.row(i) = rows[static_cast<std::size_t>(i)].first.transpose();
    f(i) = -rows[static_cast<std::size_t>(i)].second;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(E);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  const VectorXd b = qr.householderQ().transpose() * f;
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  if (rank < q && b.tail(q - rank).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    failure = p.equalities().front().name;
    return red;
  }
  const MatrixXd R = qr.matrixR().topRows(rank).triangularView<Eigen::Upper>();
  const auto R11 = R.leftCols(rank).triangularView<Eigen::Upper>();
  const Index free = layout.n - rank;
  MatrixXd T = R.rightCols(free);
  R11.solveInPlace(T);  // R11^{-1} R12
  T = T.unaryExpr([](double v) { return std::abs(v) < 1e-13 ? 0.0 : v; });

  VectorXd zN(free);
  for (Index k = 0; k < free; ++k) zN(k) = x0(perm(rank + k));
  VectorXd zB = b.head(rank);
  R11.solveInPlace(zB);
  zB -= T * zN;
  for (Index i = 0; i < rank; ++i) red.xp(perm(i)) = zB(i);

  red.N = MatrixXd::Zero(layout.n, free);
  for (Index k = 0; k < free; ++k) {
    red.N(perm(rank + k), k) = 1.0;
    for (Index i = 0; i < rank; ++i) red.N(perm(i), k) = -T(i, k);
  }
  return red;
}

Block reduce_block(const std::string& name, const Expanded& ex, const Reduction& red, double floor) {
  Block b;
  b.name = name;
  b.m = ex.F0.rows();
  b.floor = floor;
  b.F0 = ex.F0 - floor * MatrixXd::Identity(b.m, b.m);
  CoordMap reduced;
  for (const auto& [j, Fj] : ex.F) {
    b.F0 += red.xp(j) * Fj;
    if (red.identity) {
      reduced.emplace(j, Fj);
      continue;
    }
    for (Index k = 0; k < red.N.cols(); ++k) {
      const double v = red.N(j, k);
      if (v == 0.0) continue;
      auto it = reduced.find(k);
      if (it == reduced.end()) it = reduced.emplace(k, MatrixXd::Zero(b.m, b.m)).first;
      it->second += v * Fj;
    }
  }
  b.F.resize(b.m, b.m * static_cast<Index>(reduced.size()));
  Index col = 0;
  for (const auto& [k, Fk] : reduced) {
    if (Fk.cwiseAbs().maxCoeff() == 0.0) continue;
    b.active.push_back(k);
    b.F.middleCols(col, b.m) = Fk;
    col += b.m;
  }
  b.F.conservativeResize(b.m, col);
  return b;
}

struct Compiled {
  System system;
  Reduction reduction;
  Layout layout;
  std::string equality_failure;
};

Compiled compile(const Problem& p, const VectorXd& x0, double strict_margin) {
  Compiled out;
  out.layout = make_layout(p);
  out.reduction = reduce_equalities(p, out.layout, x0, out.equality_failure);
  if (!out.equality_failure.empty()) return out;
  const auto& red = out.reduction;
  System& s = out.system;
  s.dim = red.N.cols();

  const auto obj = expand(p.linear_objective(), out.layout);
  VectorXd cx = VectorXd::Zero(out.layout.n);
  for (const auto& [k, m] : obj.F) cx(k) = m(0, 0);
  s.c = red.N.transpose() * cx;
  s.c0 = obj.F0(0, 0) + cx.dot(red.xp);

  for (const auto& t : p.logdet_terms()) {
    auto ex = expand(t.arg, out.layout);
    require_symmetric(ex, t.name);
    Block b = reduce_block(t.name, ex, red, 0.0);
    b.weight = t.weight;
    s.logdets.push_back(std::move(b));
  }
  for (const auto& c : p.constraints()) {
    auto ex = expand(c.expr, out.layout);
    require_symmetric(ex, c.name);
    const double floor = c.strict ? strict_margin * std::max(1.0, ex.F0.norm()) : 0.0;
    s.barriers.push_back(reduce_block(c.name, ex, red, floor));
    s.order += static_cast<double>(c.expr.rows());
  }
  return out;
}

MatrixXd block_value(const Block& b, const VectorXd& y) {
  MatrixXd M = b.F0;
  for (std::size_t k = 0; k < b.active.size(); ++k) {
    const double v = y(b.active[k]);
    if (v != 0.0) M.noalias() += v * b.F.middleCols(static_cast<Index>(k) * b.m, b.m);
  }
  return M;
}

MatrixXd block_direction(const Block& b, const VectorXd& dy) {
  MatrixXd D = MatrixXd::Zero(b.m, b.m);
  for (std::size_t k = 0; k < b.active.size(); ++k) {
    const double v = dy(b.active[k]);
    if (v != 0.0) D.noalias() += v * b.F.middleCols(static_cast<Index>(k) * b.m, b.m);
  }
  return D;
}

// -logdet(M), or +inf outside the cone.
double neg_logdet(const MatrixXd& M) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const auto d = llt.matrixLLT().diagonal();
  if ((d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  return -2.0 * d.array().log().sum();
}

double min_eig(const MatrixXd& M) {
  if (M.size() == 1) return M(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Adds kappa * (-logdet M) derivatives; false on Cholesky breakdown.
bool accumulate(const Block& b, const MatrixXd& M, double kappa, VectorXd& g, MatrixXd& H) {
  if (b.active.empty()) return true;
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return false;
  const auto L = llt.matrixL();
  const Index m = b.m;
  const Index p = static_cast<Index>(b.active.size());
  MatrixXd W = b.F;
  L.solveInPlace(W);
  MatrixXd S(m, m * p);
  for (Index k = 0; k < p; ++k) S.middleCols(k * m, m) = W.middleCols(k * m, m).transpose();
  L.solveInPlace(S);
  Eigen::Map<const MatrixXd> V(S.data(), m * m, p);
  MatrixXd local(p, p);
  local.setZero();
  local.selfadjointView<Eigen::Lower>().rankUpdate(V.transpose());
  local = local.selfadjointView<Eigen::Lower>();
  for (Index k = 0; k < p; ++k) {
    double tr = 0.0;
    for (Index i = 0; i < m; ++i) tr += S(i, k * m + i);
    g(b.active[static_cast<std::size_t>(k)]) -= kappa * tr;
  }
  for (Index k = 0; k < p; ++k) {
    const Index gk = b.active[static_cast<std::size_t>(k)];
    for (Index l = 0; l < p; ++l) H(gk, b.active[static_cast<std::size_t>(l)]) += kappa * local(k, l);
  }
  return true;
}

enum class EngineStatus { Converged, Stopped, MaxIter, Numerical, Infeasible };

struct EngineResult {
  EngineStatus status = EngineStatus::Numerical;
  VectorXd y;
  double t = 0.0;
  double gap = 0.0;
  double objective = 0.0;
  int steps = 0;
  std::string failed_block;
};

// Original objective (without barriers) at y.
double objective_value(const System& s, const VectorXd& y) {
  double f = s.c.dot(y) + s.c0;
  for (const auto& b : s.logdets) f += b.weight * neg_logdet(block_value(b, y));
  return f;
}

// Called after each Newton step (centered=false) and after each centering (centered=true).
using Monitor = std::function<std::optional<EngineStatus>(const VectorXd& y, double t, bool centered)>;

EngineResult run_barrier(const System& s, VectorXd y, const SolverOptions& opt, int max_steps,
                         const Monitor& monitor) {
  EngineResult res;
  double t = opt.t0;
  const std::size_t nl = s.logdets.size();
  const std::size_t nb = s.barriers.size();
  std::vector<MatrixXd> M(nl + nb), D(nl + nb);
  auto block_at = [&](std::size_t i) -> const Block& { return i < nl ? s.logdets[i] : s.barriers[i - nl]; };
  auto kappa_of = [&](std::size_t i) { return i < nl ? t * s.logdets[i].weight : 1.0; };

  auto finish = [&](EngineStatus st) {
    res.status = st;
    res.y = y;
    res.t = t;
    res.gap = s.order / t;
    res.objective = objective_value(s, y);
    return res;
  };

  for (;;) {
    // Centering.
    for (;;) {
      VectorXd g = t * s.c;
      MatrixXd H = MatrixXd::Zero(s.dim, s.dim);
      double f = t * s.c.dot(y);
      for (std::size_t i = 0; i < nl + nb; ++i) {
        M[i] = block_value(block_at(i), y);
        const double nld = neg_logdet(M[i]);
        if (!std::isfinite(nld) || !accumulate(block_at(i), M[i], kappa_of(i), g, H)) {
          res.failed_block = block_at(i).name;
          return finish(EngineStatus::Numerical);
        }
        f += kappa_of(i) * nld;
      }
      Eigen::LLT<MatrixXd> hllt(H);
      VectorXd dy;
      if (hllt.info() == Eigen::Success) {
        dy = hllt.solve(-g);
      } else {
        const double ridge = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<MatrixXd> ldlt(H + ridge * MatrixXd::Identity(s.dim, s.dim));
        dy = ldlt.solve(-g);
      }
      const double lambda2 = -g.dot(dy);
      if (!std::isfinite(lambda2)) {
        res.failed_block = "newton system";
        return finish(EngineStatus::Numerical);
      }
      // Below a few hundred ulps of f the decrement is rounding noise.
      const double noise = 256.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
      if (lambda2 / 2.0 <= std::max(opt.centering_tolerance, noise)) break;

      for (std::size_t i = 0; i < nl + nb; ++i) D[i] = block_direction(block_at(i), dy);
      const double slope = g.dot(dy);
      double step = 1.0;
      bool accepted = false;
      while (step > 1e-14) {
        double ft = t * s.c.dot(y + step * dy);
        bool inside = true;
        for (std::size_t i = 0; i < nl + nb && inside; ++i) {
          const double v = neg_logdet(M[i] + step * D[i]);
          if (!std::isfinite(v)) inside = false;
          ft += kappa_of(i) * v;
        }
        if (inside && ft <= f + opt.armijo * step * slope) {
          accepted = true;
          break;
        }
        step *= opt.backtrack;
      }
      if (!accepted) {
        spdlog::trace("sdp: line search stalled at lambda^2 = {:.3g}", lambda2);
        // Roundoff floor: the point is as centered as double precision allows.
        if (lambda2 < 1e-5) break;
        res.failed_block = "line search";
        return finish(EngineStatus::Numerical);
      }
      y += step * dy;
      ++res.steps;
      if (monitor) {
        if (auto st = monitor(y, t, false)) return finish(*st);
      }
      if (res.steps >= max_steps) return finish(EngineStatus::MaxIter);
    }
    if (monitor) {
      if (auto st = monitor(y, t, true)) return finish(*st);
    }
    const double obj = objective_value(s, y);
    spdlog::trace("sdp: centered at t = {:.3g} after {} steps, objective {:.12g}", t, res.steps, obj);
    if (s.order / t <= opt.gap_tolerance * (1.0 + std::abs(obj))) return finish(EngineStatus::Converged);
    t *= opt.mu;
  }
}

// First constraint or logdet domain violated at y (with floors), or empty.
std::string first_violation(const System& s, const VectorXd& y) {
  for (const auto& b : s.logdets) {
    if (!std::isfinite(neg_logdet(block_value(b, y)))) return b.name;
  }
  for (const auto& b : s.barriers) {
    if (!std::isfinite(neg_logdet(block_value(b, y)))) return b.name;
  }
  return {};
}

struct PhaseOne {
  bool feasible = false;
  VectorXd y;
  int steps = 0;
  std::string worst;
  std::string message;
  bool numerical = false;
};

// min s  s.t.  F_j(y) - floor_j I + s I >= 0 for every constraint and logdet domain, s >= -1.
PhaseOne phase_one(const System& s, const VectorXd& y0, const SolverOptions& opt, double strict_margin) {
  System p1;
  p1.dim = s.dim + 1;
  p1.c = VectorXd::Zero(p1.dim);
  p1.c(s.dim) = 1.0;
  const Index sidx = s.dim;
  auto augment = [&](const Block& b, double extra_floor) {
    Block a = b;
    a.F0 -= extra_floor * MatrixXd::Identity(b.m, b.m);
    a.floor += extra_floor;
    a.active.push_back(sidx);
    a.F.conservativeResize(b.m, b.F.cols() + b.m);
    a.F.rightCols(b.m).setIdentity();
    a.weight = 1.0;
    return a;
  };
  double worst_eig = 0.0;
  for (const auto& b : s.logdets) {
    p1.barriers.push_back(augment(b, strict_margin * std::max(1.0, b.F0.norm())));
  }
  for (const auto& b : s.barriers) p1.barriers.push_back(augment(b, 0.0));
  for (const auto& b : p1.barriers) {
    worst_eig = std::min(worst_eig, min_eig(block_value(b, [&] {
                           VectorXd z(p1.dim);
                           z << y0, 0.0;
                           return z;
                         }())));
    p1.order += static_cast<double>(b.m);
  }
  Block floor;
  floor.name = "phase-I floor";
  floor.m = 1;
  floor.F0 = MatrixXd::Constant(1, 1, 1.0);
  floor.active = {sidx};
  floor.F = MatrixXd::Identity(1, 1);
  p1.barriers.push_back(floor);
  p1.order += 1.0;

  VectorXd z(p1.dim);
  z << y0, std::max(0.0, -worst_eig) + 1.0;

  auto worst_block = [&](const VectorXd& zz) {
    std::string name;
    double e = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < p1.barriers.size(); ++i) {
      const auto& b = p1.barriers[i];
      const double v = min_eig(block_value(b, zz)) - zz(sidx);
      if (v < e) {
        e = v;
        name = b.name;
      }
    }
    return name;
  };

  const double margin = opt.phase1_margin;
  Monitor monitor = [&](const VectorXd& zz, double t, bool centered) -> std::optional<EngineStatus> {
    if (zz(sidx) < -margin) return EngineStatus::Stopped;
    if (centered && zz(sidx) - p1.order / t > 0.0) return EngineStatus::Infeasible;
    return std::nullopt;
  };
  SolverOptions o = opt;
  o.gap_tolerance = 1e-10;
  const auto r = run_barrier(p1, z, o, opt.max_phase1_steps, monitor);

  PhaseOne out;
  out.steps = r.steps;
  out.y = r.y.head(s.dim);
  if (r.status == EngineStatus::Stopped && first_violation(s, out.y).empty()) {
    out.feasible = true;
    return out;
  }
  out.worst = worst_block(r.y);
  out.numerical = r.status == EngineStatus::Numerical;
  out.message = fmt::format("phase I ended with slack {:.6g} ({})", r.y(sidx),
                            r.status == EngineStatus::Infeasible  ? "lower bound positive"
                            : r.status == EngineStatus::MaxIter   ? "step limit"
                            : r.status == EngineStatus::Numerical ? "numerical breakdown at " + r.failed_block
                                                                  : "converged without a strictly feasible point");
  return out;
}

ValueMap to_values(const Problem& p, const Compiled& c, const VectorXd& y) {
  return unpack(p, c.reduction.xp + c.reduction.N * y);
}

void fill_diagnostics(const Problem& p, SdpSolution& sol) {
  const auto report = check_solution(p, sol.values);
  sol.min_constraint_eig = report.min_constraint_eig;
  try {
    sol.objective = p.objective(sol.values);
  } catch (const NotPositiveDefiniteError&) {
    sol.objective = std::numeric_limits<double>::infinity();
  }
}

struct Prepared {
  Compiled compiled;
  VectorXd y0;
  bool ok = false;
  SdpSolution failure;
};

Prepared prepare(const Problem& problem, const SolverOptions& options, const std::optional<ValueMap>& initial,
                 int& phase1_steps, bool& used_phase1) {
  Prepared out;
  const auto layout = make_layout(problem);
  const VectorXd x0 = initial ? pack(problem, *initial) : VectorXd::Zero(layout.n);
  out.compiled = compile(problem, x0, options.strict_margin);
  const auto& comp = out.compiled;
  if (!comp.equality_failure.empty()) {
    out.failure.status = SolveStatus::Infeasible;
    out.failure.failed_constraint = comp.equality_failure;
    out.failure.message = "inconsistent equality constraints";
    out.failure.values = unpack(problem, x0);
    return out;
  }
  out.y0 = VectorXd::Zero(comp.system.dim);
  const std::string violated = first_violation(comp.system, out.y0);
  if (violated.empty()) {
    out.ok = true;
    return out;
  }
  if (!violated.empty() && !options.allow_phase1) {
    out.failure.status = SolveStatus::Infeasible;
    out.failure.failed_constraint = violated;
    out.failure.message = "initial point is not strictly feasible and phase I is disabled";
    out.failure.values = to_values(problem, comp, out.y0);
    return out;
  }
  if (violated.empty()) {
    out.ok = true;
    return out;
  }
  spdlog::debug("sdp: initial point violates '{}', running phase I", violated);
  used_phase1 = true;
  const auto p1 = phase_one(comp.system, out.y0, options, options.strict_margin);
  phase1_steps = p1.steps;
  if (!p1.feasible) {
    out.failure.status = p1.numerical ? SolveStatus::NumericalFailure : SolveStatus::Infeasible;
    out.failure.failed_constraint = p1.worst;
    out.failure.message = p1.message;
    out.failure.values = to_values(problem, comp, p1.y);
    return out;
  }
  out.y0 = p1.y;
  out.ok = true;
  return out;
}

}  // namespace

SdpSolution solve(const Problem& problem, const SolverOptions& options, const std::optional<ValueMap>& initial) {
  int p1_steps = 0;
  bool used_p1 = false;
  auto prep = prepare(problem, options, initial, p1_steps, used_p1);
  if (!prep.ok) {
    prep.failure.phase1_steps = p1_steps;
    prep.failure.used_phase1 = used_p1;
    fill_diagnostics(problem, prep.failure);
    return prep.failure;
  }
  const auto& comp = prep.compiled;
  const auto r = run_barrier(comp.system, prep.y0, options, options.max_newton_steps, {});

  SdpSolution sol;
  sol.values = to_values(problem, comp, r.y);
  sol.newton_steps = r.steps;
  sol.phase1_steps = p1_steps;
  sol.used_phase1 = used_p1;
  sol.duality_gap_estimate = r.gap;
  switch (r.status) {
    case EngineStatus::Converged:
      sol.status = SolveStatus::Optimal;
      break;
    case EngineStatus::MaxIter:
      sol.status = SolveStatus::MaxIter;
      sol.message = fmt::format("stopped after {} Newton steps", r.steps);
      break;
    default:
      sol.status = SolveStatus::NumericalFailure;
      sol.failed_constraint = r.failed_block;
      sol.message = fmt::format("Cholesky breakdown in '{}'", r.failed_block);
      break;
  }
  fill_diagnostics(problem, sol);
  if (sol.status == SolveStatus::Optimal && sol.min_constraint_eig < -1e-8) {
    sol.status = SolveStatus::NumericalFailure;
    sol.message = fmt::format("returned point violates constraints (min eigenvalue {:.3g})", sol.min_constraint_eig);
  }
  spdlog::debug("sdp: {} after {} Newton steps (phase I {}), objective {:.12g}, gap {:.3g}", to_string(sol.status),
                sol.newton_steps, sol.phase1_steps, sol.objective, sol.duality_gap_estimate);
  return sol;
}

SdpSolution find_feasible_point(const Problem& problem, const SolverOptions& options,
                                const std::optional<ValueMap>& initial) {
  int p1_steps = 0;
  bool used_p1 = false;
  SolverOptions o = options;
  o.allow_phase1 = true;
  auto prep = prepare(problem, o, initial, p1_steps, used_p1);
  if (!prep.ok) {
    prep.failure.phase1_steps = p1_steps;
    prep.failure.used_phase1 = used_p1;
    fill_diagnostics(problem, prep.failure);
    return prep.failure;
  }
  SdpSolution sol;
  sol.values = to_values(problem, prep.compiled, prep.y0);
  sol.status = SolveStatus::Optimal;
  sol.phase1_steps = p1_steps;
  sol.used_phase1 = used_p1;
  fill_diagnostics(problem, sol);
  return sol;
}

}  // namespace privsynth::sdp
