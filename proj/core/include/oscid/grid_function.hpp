#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oscid/types.hpp"

namespace oscid {

/// Declared boundary behavior of a grid function. Updates built from
/// directions with compatible tags cannot change the declared data, which is
/// what makes boundary-condition preservation checkable during descent.
enum class LeftBc { none, neumann_zero };
enum class RightBc { none, dirichlet_zero, neumann_value };

struct BoundaryTags {
    LeftBc left = LeftBc::none;
    RightBc right = RightBc::none;
    double right_slope = 0.0;  // meaningful for RightBc::neumann_value

    bool operator==(const BoundaryTags&) const = default;
};

/// Scalar function of the state magnitude r, stored as nodal values on the
/// equispaced grid r_k = k*h over [0, r_max], h = r_max/(n_nodes-1).
/// Evaluation is exact at nodes and linear between them; queries above r_max
/// clamp to the last nodal value (transients of intermediate iterates may
/// overshoot the limit cycle, and extrapolation is not meaningful there).
class GridFunction {
public:
    GridFunction(double r_max, int n_nodes, double fill = 0.0,
                 BoundaryTags tags = {});
    GridFunction(double r_max, std::vector<double> values, BoundaryTags tags = {});

    static GridFunction from_function(double r_max, int n_nodes,
                                      const std::function<double(double)>& fn,
                                      BoundaryTags tags = {});

    double r_max() const { return r_max_; }
    int n_nodes() const { return static_cast<int>(values_.size()); }
    double h() const { return h_; }
    double node_r(int k) const { return (k == n_nodes() - 1) ? r_max_ : k * h_; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }
    double& operator[](int k) { return values_[static_cast<std::size_t>(k)]; }

    const BoundaryTags& tags() const { return tags_; }
    void set_tags(BoundaryTags t) { tags_ = t; }

    /// Piecewise-linear interpolation; r < 0 is a domain error, r > r_max
    /// clamps to the last node.
    double eval(double r) const;

    /// Derivative of the interpolant: cell slope between nodes, centered
    /// difference at interior nodes, one-sided second-order at the boundary
    /// nodes. A declared Neumann boundary overrides the boundary value.
    double derivative(double r) const;

    /// Gradient with respect to the 2-state: (dg/dr)(|xi|) * xi/|xi|,
    /// and (0,0) at the origin.
    Vec2 state_gradient(const Vec2& xi) const;

    /// Locates r in a cell: returns (cell index k, fraction in [0,1]) with
    /// r ~ (k+frac)*h. Values above r_max land in the last cell with frac=1.
    std::pair<int, double> locate(double r) const;

    GridFunction& operator*=(double s);

    /// Writes "# <comment>" followed by an `r,value` header and one row per
    /// node. Reading accepts any file in that shape.
    void write_csv(const std::string& path, const std::string& comment = "") const;
    static GridFunction read_csv(const std::string& path);

private:
    double r_max_;
    double h_;
    std::vector<double> values_;
    BoundaryTags tags_;
};

/// H1(0, r_max) inner product with length scale ell:
///   integral of z1*z2 + ell^2 * z1' * z2' dr,
/// the value term by trapezoidal quadrature on the nodes and the derivative
/// term summed exactly over cells (the interpolants' slopes are piecewise
/// constant). Grids must match.
double h1_inner(const GridFunction& z1, const GridFunction& z2, double ell);

/// Trapezoidal quadrature of z1*z2 over [0, r_max] (the ell = 0 case).
double l2_inner(const GridFunction& z1, const GridFunction& z2);

/// Lumped nodal quadrature weight: h at interior nodes, h/2 at the ends.
double lumped_weight(const GridFunction& g, int k);

}  // namespace oscid
