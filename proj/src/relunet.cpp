#include "cpwa/relunet.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <functional>
#include <json.hpp>

#include "cpwa/lp.hpp"

namespace cpwa {

int ReluNet::hidden_neuron_count() const {
  int n = 0;
  for (int l = 0; l + 1 < static_cast<int>(layers.size()); ++l)
    n += static_cast<int>(layers[l].W.rows());
  return n;
}

int ReluNet::last_hidden_width() const {
  if (layers.size() < 2) return input_dim();
  return static_cast<int>(layers[layers.size() - 2].W.rows());
}

void ReluNet::check_composable() const {
  if (layers.empty()) throw ConfigError("net: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].W.rows() != layers[l].b.size())
      throw ConfigError("net: W/b row mismatch in layer " + std::to_string(l));
    if (l > 0 && layers[l].W.cols() != layers[l - 1].W.rows())
      throw ConfigError("net: layer " + std::to_string(l) +
                        " input width does not match previous layer");
  }
}

Vec ReluNet::eval(const Vec& x) const {
  Vec h = x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    h = (layers[l].W * h + layers[l].b).cwiseMax(0.0);
  return layers.back().W * h + layers.back().b;
}

Vec ReluNet::hidden_eval(const Vec& x) const {
  Vec h = x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    h = (layers[l].W * h + layers[l].b).cwiseMax(0.0);
  return h;
}

std::string ReluNet::to_json() const {
  nlohmann::json j;
  j["n"] = input_dim();
  j["m"] = output_dim();
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : layers) {
    nlohmann::json jl;
    jl["W"] = nlohmann::json::array();
    for (int r = 0; r < layer.W.rows(); ++r) {
      std::vector<double> row(layer.W.cols());
      for (int c = 0; c < layer.W.cols(); ++c) row[c] = layer.W(r, c);
      jl["W"].push_back(row);
    }
    jl["b"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
    j["layers"].push_back(std::move(jl));
  }
  return j.dump(2);
}

ReluNet ReluNet::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ReluNet net;
  for (const auto& jl : j.at("layers")) {
    ReluNet::Layer layer;
    const auto& rows = jl.at("W");
    const int nr = static_cast<int>(rows.size());
    const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
    layer.W.resize(nr, nc);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) layer.W(r, c) = rows[r][c].get<double>();
    const auto& bv = jl.at("b");
    layer.b.resize(static_cast<int>(bv.size()));
    for (int r = 0; r < layer.b.size(); ++r) layer.b[r] = bv[r].get<double>();
    net.layers.push_back(std::move(layer));
  }
  net.check_composable();
  if (net.input_dim() != j.at("n").get<int>() ||
      net.output_dim() != j.at("m").get<int>())
    throw ConfigError("net: declared n/m do not match layer shapes");
  return net;
}

bool HPolytope::contains(const Vec& x, double tol) const {
  for (int r = 0; r < A.rows(); ++r)
    if (A.row(r).dot(x) > c[r] + tol) return false;
  return true;
}

void HPolytope::add(const Vec& a, double rhs) {
  Mat na(A.rows() + 1, a.size());
  if (A.rows() > 0) na.topRows(A.rows()) = A;
  na.row(A.rows()) = a.transpose();
  A = std::move(na);
  Vec nc(c.size() + 1);
  if (c.size() > 0) nc.head(c.size()) = c;
  nc[c.size()] = rhs;
  c = std::move(nc);
}

HPolytope HPolytope::from_box(const Box& box) {
  const int n = box.dim();
  HPolytope p;
  p.A = Mat::Zero(2 * n, n);
  p.c = Vec::Zero(2 * n);
  for (int d = 0; d < n; ++d) {
    p.A(2 * d, d) = 1.0;
    p.c[2 * d] = box.hi[d];
    p.A(2 * d + 1, d) = -1.0;
    p.c[2 * d + 1] = -box.lo[d];
  }
  return p;
}

namespace {

// Largest ball radius that fits: max t s.t. a.x + |a| t <= c. Positive iff
// the polytope is full-dimensional.
double interior_radius(const HPolytope& poly) {
  const int n = poly.dim();
  LpProblem lp;
  lp.objective = Vec::Zero(n + 1);
  lp.objective[n] = -1.0;
  lp.A = Mat::Zero(poly.num_halfspaces(), n + 1);
  lp.b = poly.c;
  for (int r = 0; r < poly.num_halfspaces(); ++r) {
    lp.A.row(r).head(n) = poly.A.row(r);
    lp.A(r, n) = poly.A.row(r).norm();
  }
  lp.var_lo = Vec::Constant(n + 1, -std::numeric_limits<double>::infinity());
  lp.var_hi = Vec::Constant(n + 1, std::numeric_limits<double>::infinity());
  lp.var_hi[n] = 1.0;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return -1.0;
  return -sol.objective;
}

struct Enumerator {
  const ReluNet& net;
  CpwaMap out;
  HPolytope constraints;        // box faces plus committed neuron halfspaces
  std::vector<bool> activation;

  // Depth-first over hidden neurons; (C, d) is the affine form of the current
  // layer input under the pattern fixed so far.
  void recurse(int layer, int neuron, Mat C, Vec d) {
    const int hidden = static_cast<int>(net.layers.size()) - 1;
    if (layer == hidden) {
      LinearRegion reg;
      reg.region = constraints;
      reg.hidden_C = C;
      reg.hidden_d = d;
      reg.piece.K_prime = net.layers.back().W * C;
      reg.piece.b_prime = net.layers.back().W * d + net.layers.back().b;
      reg.activation = activation;
      out.regions.push_back(std::move(reg));
      return;
    }
    const int width = static_cast<int>(net.layers[layer].W.rows());
    if (neuron == width) {
      // Layer done: apply the diagonal activation mask and move on.
      Mat Cn = Mat::Zero(width, C.cols());
      Vec dn = Vec::Zero(width);
      const int base = layer_offset(layer);
      for (int i = 0; i < width; ++i) {
        if (activation[base + i]) {
          Cn.row(i) = net.layers[layer].W.row(i) * C;
          dn[i] = net.layers[layer].W.row(i).dot(d) + net.layers[layer].b[i];
        }
      }
      recurse(layer + 1, 0, std::move(Cn), std::move(dn));
      return;
    }
    const Vec g = (net.layers[layer].W.row(neuron) * C).transpose();
    const double g0 = net.layers[layer].W.row(neuron).dot(d) +
                      net.layers[layer].b[neuron];
    if (g.norm() < numerics().geometry_tol) {
      // Constant pre-activation: the sign is fixed, no hyperplane to add.
      ++out.merged_degenerate;
      activation.push_back(g0 >= 0.0);
      recurse(layer, neuron + 1, C, d);
      activation.pop_back();
      return;
    }
    const int rows_before = constraints.num_halfspaces();
    // Active branch: g.x + g0 >= 0.
    constraints.add(-g, g0);
    if (interior_radius(constraints) > numerics().geometry_tol) {
      activation.push_back(true);
      recurse(layer, neuron + 1, C, d);
      activation.pop_back();
    }
    shrink_to(rows_before);
    // Inactive branch: g.x + g0 <= 0.
    constraints.add(g, -g0);
    if (interior_radius(constraints) > numerics().geometry_tol) {
      activation.push_back(false);
      recurse(layer, neuron + 1, C, d);
      activation.pop_back();
    }
    shrink_to(rows_before);
  }

  int layer_offset(int layer) const {
    int off = 0;
    for (int l = 0; l < layer; ++l)
      off += static_cast<int>(net.layers[l].W.rows());
    return off;
  }

  void shrink_to(int rows) {
    constraints.A.conservativeResize(rows, Eigen::NoChange);
    constraints.c.conservativeResize(rows);
  }
};

}  // namespace

CpwaMap enumerate_regions(const ReluNet& net, const Box& q) {
  net.check_composable();
  if (net.input_dim() != q.dim())
    throw ConfigError("enumerate_regions: box dimension mismatch");
  if (net.hidden_layer_count() > limits().max_hidden_layers)
    throw CapabilityError("enumerate_regions: too many hidden layers");
  if (net.hidden_neuron_count() > limits().max_hidden_neurons)
    throw CapabilityError("enumerate_regions: too many hidden neurons");
  if (net.input_dim() > limits().max_vertex_dim)
    throw CapabilityError("enumerate_regions: input dimension too large");

  Enumerator e{net, {}, HPolytope::from_box(q), {}};
  e.out.box = q;
  const int n = net.input_dim();
  e.recurse(0, 0, Mat::Identity(n, n), Vec::Zero(n));
  return e.out;
}

std::vector<Vec> region_vertices(const HPolytope& poly) {
  const int n = poly.dim();
  if (n > limits().max_vertex_dim)
    throw CapabilityError("region_vertices: dimension too large");
  const int m = poly.num_halfspaces();
  std::vector<Vec> verts;
  std::vector<int> idx(n);
  // Every n-subset of halfspace boundaries, kept if the system is
  // well-conditioned and the solution satisfies all constraints.
  std::function<void(int, int)> choose = [&](int start, int k) {
    if (k == n) {
      Mat A(n, n);
      Vec c(n);
      for (int i = 0; i < n; ++i) {
        A.row(i) = poly.A.row(idx[i]);
        c[i] = poly.c[idx[i]];
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible()) return;
      const Vec x = lu.solve(c);
      if (!poly.contains(x, numerics().feasibility_tol)) return;
      for (const Vec& v : verts)
        if ((v - x).lpNorm<Eigen::Infinity>() < numerics().geometry_tol) return;
      verts.push_back(x);
      return;
    }
    for (int j = start; j <= m - (n - k); ++j) {
      idx[k] = j;
      choose(j + 1, k + 1);
    }
  };
  choose(0, 0);
  return verts;
}

std::vector<Vec> cpwa_vertices(const CpwaMap& map) {
  std::vector<Vec> all;
  for (const auto& reg : map.regions) {
    for (const Vec& v : region_vertices(reg.region)) {
      bool dup = false;
      for (const Vec& w : all)
        if ((w - v).lpNorm<Eigen::Infinity>() < numerics().geometry_tol) {
          dup = true;
          break;
        }
      if (!dup) all.push_back(v);
    }
  }
  return all;
}

double lipschitz_on(const ReluNet& net, const Box& q) {
  const CpwaMap map = enumerate_regions(net, q);
  double lip = 0.0;
  for (const auto& reg : map.regions) {
    Eigen::JacobiSVD<Mat> svd(reg.piece.K_prime);
    if (svd.singularValues().size() > 0)
      lip = std::max(lip, svd.singularValues()[0]);
  }
  return lip;
}

}  // namespace cpwa
