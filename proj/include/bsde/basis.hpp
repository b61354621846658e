#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace bsde {

using CellIndex = std::uint64_t;

/// Features of one point: the cell it falls in (if any) and the local
/// feature vector (1, x - cell_center) truncated to the basis degree.
/// Outside the domain all features are zero.
struct DesignRow {
    std::optional<CellIndex> cell;
    std::vector<double> features;
};

/// Local basis on a regular partition of the box
///   D = prod_i (center_i - a_i, center_i + a_i]
/// into half-open cells of edge delta_i. Degree 0 uses the cell indicators;
/// degree 1 adds, per cell, the coordinates centered at the cell center.
class HypercubeBasis {
public:
    HypercubeBasis(std::vector<double> center, std::vector<double> half_width,
                   std::vector<double> edge, int degree);

    /// Same half-width and edge on every axis.
    static HypercubeBasis isotropic(std::vector<double> center, double half_width, double edge,
                                    int degree);

    std::size_t dimension() const noexcept { return center_.size(); }
    int degree() const noexcept { return degree_; }
    std::size_t cells_per_axis(std::size_t axis) const { return cells_per_axis_.at(axis); }
    CellIndex cell_count() const noexcept { return cell_count_; }
    std::size_t functions_per_cell() const noexcept { return degree_ == 0 ? 1 : 1 + dimension(); }
    /// K = cells x functions per cell.
    std::uint64_t size() const noexcept { return cell_count_ * functions_per_cell(); }

    std::span<const double> center() const noexcept { return center_; }
    std::span<const double> half_width() const noexcept { return half_width_; }
    std::span<const double> edge() const noexcept { return edge_; }

    /// Row-major fold of the per-axis index (last axis fastest), or nullopt
    /// outside D.
    std::optional<CellIndex> locate(std::span<const double> x) const;
    /// Per-axis indices; returns false outside D.
    bool locate_axes(std::span<const double> x, std::span<std::size_t> axes) const;
    CellIndex fold(std::span<const std::size_t> axes) const;
    void unfold(CellIndex cell, std::span<std::size_t> axes) const;
    std::vector<double> cell_center(CellIndex cell) const;

    DesignRow design_row(std::span<const double> x) const;

    /// Writes the local features of `x` relative to cell `cell` into `out`
    /// (length functions_per_cell()).
    void local_features(CellIndex cell, std::span<const double> x, std::span<double> out) const;

    bool operator==(const HypercubeBasis&) const = default;

private:
    std::vector<double> center_;
    std::vector<double> half_width_;
    std::vector<double> edge_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::size_t> cells_per_axis_;
    CellIndex cell_count_ = 1;
    int degree_ = 0;
};

/// Coefficients of a function in the span of a HypercubeBasis. Only cells
/// that received samples are stored; every other coefficient is zero.
class CoefficientVector {
public:
    CoefficientVector() = default;
    CoefficientVector(std::size_t functions_per_cell, std::vector<CellIndex> cells,
                      std::vector<double> values);

    std::size_t functions_per_cell() const noexcept { return functions_per_cell_; }
    std::span<const CellIndex> occupied_cells() const noexcept { return cells_; }
    /// Coefficients of `cell`, or an empty span when the cell is unoccupied.
    std::span<const double> cell(CellIndex cell) const;
    std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t functions_per_cell_ = 1;
    std::vector<CellIndex> cells_;  // sorted
    std::vector<double> values_;
};

/// alpha . p(x); zero outside D and on unoccupied cells.
double evaluate(const HypercubeBasis& basis, const CoefficientVector& alpha, std::span<const double> x);

/// Sample points grouped by cell, with per-cell factorizations cached so
/// that many right-hand sides can be fitted against the same regressors.
class RegressionDesign {
public:
    /// `xs` is M x d, flattened.
    RegressionDesign(const HypercubeBasis& basis, std::span<const double> xs);
    ~RegressionDesign();
    RegressionDesign(RegressionDesign&&) noexcept;
    RegressionDesign& operator=(RegressionDesign&&) noexcept;

    const HypercubeBasis& basis() const noexcept { return *basis_; }
    std::size_t samples() const noexcept { return sample_cells_.size(); }
    std::optional<CellIndex> cell_of(std::size_t m) const;

    /// Empirical least-squares fit of `targets` (length M). Per cell:
    /// degree 0 gives the sample mean, degree 1 the minimum-norm solution
    /// from a complete orthogonal decomposition.
    CoefficientVector fit(std::span<const double> targets) const;

    /// alpha . p(xs[m]) reusing the cached cell lookups.
    double evaluate(const CoefficientVector& alpha, std::size_t m) const;

private:
    struct CellSolver;

    const HypercubeBasis* basis_;
    std::span<const double> xs_;
    std::vector<std::int64_t> sample_cells_;  // -1 outside
    std::vector<CellIndex> cells_;            // occupied cells, sorted
    std::vector<std::size_t> offsets_;        // into order_, size cells_+1
    std::vector<std::size_t> order_;          // samples grouped by cell, ascending m within a cell
    std::vector<std::unique_ptr<CellSolver>> solvers_;
};

/// One-shot fit; see RegressionDesign::fit.
CoefficientVector fit(const HypercubeBasis& basis, std::span<const double> xs,
                      std::span<const double> targets);

}  // namespace bsde
