#include "oscid/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oscid/csv.hpp"

namespace oscid {

GridFunction::GridFunction(double r_max, int n_nodes, double fill, BoundaryTags tags)
    : r_max_(r_max), tags_(tags) {
    if (!(r_max > 0.0)) throw std::invalid_argument("grid function: r_max must be positive");
    if (n_nodes < 3) throw std::invalid_argument("grid function: need at least 3 nodes");
    values_.assign(static_cast<std::size_t>(n_nodes), fill);
    h_ = r_max_ / (n_nodes - 1);
}

GridFunction::GridFunction(double r_max, std::vector<double> values, BoundaryTags tags)
    : r_max_(r_max), values_(std::move(values)), tags_(tags) {
    if (!(r_max > 0.0)) throw std::invalid_argument("grid function: r_max must be positive");
    if (values_.size() < 3) throw std::invalid_argument("grid function: need at least 3 nodes");
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("grid function: non-finite nodal value");
    }
    h_ = r_max_ / (static_cast<double>(values_.size()) - 1.0);
}

GridFunction GridFunction::from_function(double r_max, int n_nodes,
                                         const std::function<double(double)>& fn,
                                         BoundaryTags tags) {
    GridFunction g(r_max, n_nodes, 0.0, tags);
    for (int k = 0; k < n_nodes; ++k) g[k] = fn(g.node_r(k));
    return g;
}

std::pair<int, double> GridFunction::locate(double r) const {
    // !(r >= 0) also rejects NaN queries
    if (!(r >= 0.0)) throw std::domain_error("grid function: negative state magnitude");
    if (r >= r_max_) return {n_nodes() - 2, 1.0};
    const double u = r / h_;
    int k = std::min(static_cast<int>(u), n_nodes() - 2);
    return {k, u - k};
}

double GridFunction::eval(double r) const {
    const auto [k, frac] = locate(r);
    return values_[k] + frac * (values_[k + 1] - values_[k]);
}

double GridFunction::derivative(double r) const {
    if (r < 0.0) throw std::domain_error("grid function: negative state magnitude");
    const int n = n_nodes();
    const double u = std::min(r, r_max_) / h_;
    const int nearest = static_cast<int>(std::lround(u));
    const bool at_node = std::abs(u - nearest) <= 1e-12 * (n - 1);

    if (!at_node) {
        const auto [k, frac] = locate(r);
        (void)frac;
        return (values_[k + 1] - values_[k]) / h_;
    }
    if (nearest == 0) {
        if (tags_.left == LeftBc::neumann_zero) return 0.0;
        return (-3.0 * values_[0] + 4.0 * values_[1] - values_[2]) / (2.0 * h_);
    }
    if (nearest >= n - 1) {
        if (tags_.right == RightBc::neumann_value) return tags_.right_slope;
        return (3.0 * values_[n - 1] - 4.0 * values_[n - 2] + values_[n - 3]) / (2.0 * h_);
    }
    return (values_[nearest + 1] - values_[nearest - 1]) / (2.0 * h_);
}

Vec2 GridFunction::state_gradient(const Vec2& xi) const {
    const double r = xi.norm();
    if (r == 0.0) return {0.0, 0.0};
    const double slope = derivative(r);
    return xi * (slope / r);
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& v : values_) v *= s;
    if (tags_.right == RightBc::neumann_value) tags_.right_slope *= s;
    return *this;
}

double lumped_weight(const GridFunction& g, int k) {
    return (k == 0 || k == g.n_nodes() - 1) ? 0.5 * g.h() : g.h();
}

namespace {

void require_matching(const GridFunction& a, const GridFunction& b) {
    if (a.n_nodes() != b.n_nodes() ||
        std::abs(a.r_max() - b.r_max()) > 1e-12 * std::max(a.r_max(), b.r_max())) {
        throw std::invalid_argument("grid functions live on different grids");
    }
}

}  // namespace

double l2_inner(const GridFunction& z1, const GridFunction& z2) {
    require_matching(z1, z2);
    double acc = 0.0;
    for (int k = 0; k < z1.n_nodes(); ++k) {
        acc += lumped_weight(z1, k) * z1[k] * z2[k];
    }
    return acc;
}

double h1_inner(const GridFunction& z1, const GridFunction& z2, double ell) {
    require_matching(z1, z2);
    if (ell < 0.0) throw std::invalid_argument("h1_inner: negative length scale");
    double acc = l2_inner(z1, z2);
    if (ell > 0.0) {
        const double h = z1.h();
        double dacc = 0.0;
        for (int k = 0; k + 1 < z1.n_nodes(); ++k) {
            const double s1 = (z1[k + 1] - z1[k]) / h;
            const double s2 = (z2[k + 1] - z2[k]) / h;
            dacc += h * s1 * s2;
        }
        acc += ell * ell * dacc;
    }
    return acc;
}

void GridFunction::write_csv(const std::string& path, const std::string& comment) const {
    csv::Writer w(path, comment.empty() ? "r,value" : comment + "; columns: r,value");
    w.header({"r", "value"});
    for (int k = 0; k < n_nodes(); ++k) {
        w.row({node_r(k), values_[static_cast<std::size_t>(k)]});
    }
}

GridFunction GridFunction::read_csv(const std::string& path) {
    const auto table = csv::read_numeric(path, 2);
    if (table.size() < 3) {
        throw std::runtime_error("grid function csv: need at least 3 rows: " + path);
    }
    std::vector<double> values;
    values.reserve(table.size());
    for (const auto& row : table) values.push_back(row[1]);
    const double r_max = table.back()[0];
    GridFunction g(r_max, std::move(values));
    // Sanity: nodes must be equispaced from 0 to r_max.
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double expect = g.node_r(static_cast<int>(i));
        if (std::abs(table[i][0] - expect) > 1e-9 * std::max(1.0, r_max)) {
            throw std::runtime_error("grid function csv: nodes not equispaced: " + path);
        }
    }
    return g;
}

}  // namespace oscid
