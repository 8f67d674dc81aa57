#include "cpwa/projection.hpp"

#include <cmath>

namespace cpwa {

Vec flatten_gain(const Mat& K_prime, const Vec& b_prime) {
  const int m = static_cast<int>(K_prime.rows());
  const int n = static_cast<int>(K_prime.cols());
  Vec z(m * (n + 1));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) z[i * (n + 1) + j] = K_prime(i, j);
    z[i * (n + 1) + n] = b_prime[i];
  }
  return z;
}

void unflatten_gain(const Vec& z, int m, int n, Mat& K_prime, Vec& b_prime) {
  K_prime.resize(m, n);
  b_prime.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) K_prime(i, j) = z[i * (n + 1) + j];
    b_prime[i] = z[i * (n + 1) + n];
  }
}

MembershipReport check_membership(const CpwaMap& map, const Box& family) {
  MembershipReport rep;
  rep.inside = true;
  for (std::size_t r = 0; r < map.regions.size(); ++r) {
    const auto& piece = map.regions[r].piece;
    const Vec z = flatten_gain(piece.K_prime, piece.b_prime);
    bool ok = true;
    for (int j = 0; j < z.size(); ++j) {
      if (z[j] < family.lo[j] - numerics().lp_tol ||
          z[j] > family.hi[j] + numerics().lp_tol) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      rep.inside = false;
      rep.violating_regions.push_back(static_cast<int>(r));
    }
  }
  return rep;
}

MembershipReport check_membership(const ReluNet& net, const Box& q,
                                  const Box& family) {
  const int m = net.output_dim();
  const int n = net.input_dim();
  if (family.dim() != m * (n + 1))
    throw ConfigError("check_membership: family dimension != m*(n+1)");
  return check_membership(enumerate_regions(net, q), family);
}

namespace {

// Variable layout of the projection LP over z = (What, bhat, s, v [, t]):
// What row-major m*h entries, bhat m, s m*h, v m, and the epigraph variable t
// only in the first pass.
struct ProjLp {
  int m, h, n;
  int i_W = 0;
  int i_b, i_s, i_v, i_t;
  int n_vars;

  ProjLp(int m_, int h_, int n_, bool with_t) : m(m_), h(h_), n(n_) {
    i_b = m * h;
    i_s = i_b + m;
    i_v = i_s + m * h;
    i_t = i_v + m;
    n_vars = i_t + (with_t ? 1 : 0);
  }
  int W(int i, int j) const { return i_W + i * h + j; }
  int b(int i) const { return i_b + i; }
  int s(int i, int j) const { return i_s + i * h + j; }
  int v(int i) const { return i_v + i; }
};

void add_common_rows(LpProblem& lp, const ProjLp& L, const ReluNet& net,
                     const CpwaMap& map, const Box& family,
                     const std::vector<Vec>& hidden_at_vertices,
                     double t_cap /* <0: use the t variable */) {
  const Mat& W0 = net.layers.back().W;
  const Vec& b0 = net.layers.back().b;

  // |What - W| <= s, |bhat - b| <= v.
  for (int i = 0; i < L.m; ++i) {
    for (int j = 0; j < L.h; ++j) {
      Vec a = Vec::Zero(lp.num_vars());
      a[L.W(i, j)] = 1.0;
      a[L.s(i, j)] = -1.0;
      lp.add_row(a, W0(i, j));
      a[L.W(i, j)] = -1.0;
      lp.add_row(a, -W0(i, j));
    }
    Vec a = Vec::Zero(lp.num_vars());
    a[L.b(i)] = 1.0;
    a[L.v(i)] = -1.0;
    lp.add_row(a, b0[i]);
    a[L.b(i)] = -1.0;
    lp.add_row(a, -b0[i]);
  }

  // Vertex rows: sum_ij s_ij h_j(x) + sum_i v_i <= t (or <= t_cap).
  for (const Vec& hx : hidden_at_vertices) {
    Vec a = Vec::Zero(lp.num_vars());
    for (int i = 0; i < L.m; ++i) {
      for (int j = 0; j < L.h; ++j) a[L.s(i, j)] = hx[j];
      a[L.v(i)] = 1.0;
    }
    if (t_cap < 0.0) {
      a[L.i_t] = -1.0;
      lp.add_row(a, 0.0);
    } else {
      lp.add_row(a, t_cap);
    }
  }

  // Family membership per region: lo <= What*C row-block | What*d + bhat <= hi.
  for (const auto& reg : map.regions) {
    const Mat& C = reg.hidden_C;
    const Vec& d = reg.hidden_d;
    for (int i = 0; i < L.m; ++i) {
      for (int col = 0; col <= L.n; ++col) {
        Vec a = Vec::Zero(lp.num_vars());
        if (col < L.n) {
          for (int j = 0; j < L.h; ++j) a[L.W(i, j)] = C(j, col);
        } else {
          for (int j = 0; j < L.h; ++j) a[L.W(i, j)] = d[j];
          a[L.b(i)] = 1.0;
        }
        const int fam = i * (L.n + 1) + col;
        lp.add_row(a, family.hi[fam]);
        a = -a;
        lp.add_row(a, -family.lo[fam]);
      }
    }
  }
}

}  // namespace

ProjectionResult project_output_layer(const ReluNet& net, const Box& q,
                                      const Box& family) {
  net.check_composable();
  const int m = net.output_dim();
  const int n = net.input_dim();
  const int h = net.last_hidden_width();
  if (family.dim() != m * (n + 1))
    throw ConfigError("project_output_layer: family dimension != m*(n+1)");

  const CpwaMap map = enumerate_regions(net, q);
  const std::vector<Vec> verts = cpwa_vertices(map);
  std::vector<Vec> hidden_at_vertices;
  hidden_at_vertices.reserve(verts.size());
  for (const Vec& x : verts) hidden_at_vertices.push_back(net.hidden_eval(x));

  // Pass 1: minimize the epigraph variable t.
  ProjLp L1(m, h, n, true);
  LpProblem lp1;
  lp1.objective = Vec::Zero(L1.n_vars);
  lp1.objective[L1.i_t] = 1.0;
  lp1.A = Mat(0, L1.n_vars);
  lp1.b = Vec(0);
  add_common_rows(lp1, L1, net, map, family, hidden_at_vertices, -1.0);
  const LpSolution s1 = solve_lp(lp1);
  if (s1.status != LpStatus::Optimal)
    throw std::logic_error(
        "project_output_layer: projection LP not optimal (internal error: a "
        "box family always admits the center-constant controller)");
  const double t_star = s1.objective;

  // Pass 2: among t-optimal solutions, minimize total perturbation.
  ProjLp L2(m, h, n, false);
  LpProblem lp2;
  lp2.objective = Vec::Zero(L2.n_vars);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < h; ++j) lp2.objective[L2.s(i, j)] = 1.0;
    lp2.objective[L2.v(i)] = 1.0;
  }
  lp2.A = Mat(0, L2.n_vars);
  lp2.b = Vec(0);
  add_common_rows(lp2, L2, net, map, family, hidden_at_vertices,
                  t_star + numerics().lp_tol);
  const LpSolution s2 = solve_lp(lp2);
  if (s2.status != LpStatus::Optimal)
    throw std::logic_error("project_output_layer: tie-break LP not optimal");

  ProjectionResult out;
  out.net = net;
  Mat& Wn = out.net.layers.back().W;
  Vec& bn = out.net.layers.back().b;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < h; ++j) Wn(i, j) = s2.x[L2.W(i, j)];
    bn[i] = s2.x[L2.b(i)];
  }
  out.objective = t_star;
  return out;
}

double output_change_bound(const ReluNet& before, const ReluNet& after,
                           const Box& q) {
  if (before.layers.size() != after.layers.size())
    throw ConfigError("output_change_bound: layer count mismatch");
  for (std::size_t l = 0; l + 1 < before.layers.size(); ++l) {
    if (before.layers[l].W != after.layers[l].W ||
        before.layers[l].b != after.layers[l].b)
      throw ConfigError("output_change_bound: hidden layers differ");
  }
  const Mat dW = (after.layers.back().W - before.layers.back().W).cwiseAbs();
  const Vec db = (after.layers.back().b - before.layers.back().b).cwiseAbs();
  const double bias_term = db.sum();

  const CpwaMap map = enumerate_regions(before, q);
  double bound = 0.0;
  for (const Vec& x : cpwa_vertices(map)) {
    const Vec hx = before.hidden_eval(x);
    double s = bias_term;
    for (int i = 0; i < dW.rows(); ++i) s += dW.row(i).dot(hx);
    bound = std::max(bound, s);
  }
  return bound;
}

}  // namespace cpwa
