#include "bsde/basis.hpp"

#include "bsde/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bsde {

HypercubeBasis::HypercubeBasis(std::vector<double> center, std::vector<double> half_width,
                               std::vector<double> edge, int degree)
    : center_(std::move(center)),
      half_width_(std::move(half_width)),
      edge_(std::move(edge)),
      degree_(degree) {
    const std::size_t d = center_.size();
    if (d == 0) throw std::invalid_argument("HypercubeBasis: empty center");
    if (half_width_.size() != d || edge_.size() != d)
        throw std::invalid_argument("HypercubeBasis: center, half-width and edge lengths differ");
    if (degree_ != 0 && degree_ != 1) throw std::invalid_argument("HypercubeBasis: degree must be 0 or 1");

    lower_.resize(d);
    upper_.resize(d);
    cells_per_axis_.resize(d);
    cell_count_ = 1;
    for (std::size_t i = 0; i < d; ++i) {
        if (!(half_width_[i] > 0.0) || !std::isfinite(half_width_[i]))
            throw std::invalid_argument("HypercubeBasis: half-width must be positive");
        if (!(edge_[i] > 0.0) || !std::isfinite(edge_[i]))
            throw std::invalid_argument("HypercubeBasis: edge must be positive");
        lower_[i] = center_[i] - half_width_[i];
        upper_[i] = center_[i] + half_width_[i];
        const double n = std::ceil(2.0 * half_width_[i] / edge_[i]);
        if (n > 1e15) throw std::invalid_argument("HypercubeBasis: too many cells on an axis");
        cells_per_axis_[i] = static_cast<std::size_t>(n);
        if (cell_count_ > std::numeric_limits<CellIndex>::max() / 4 / cells_per_axis_[i])
            throw std::invalid_argument("HypercubeBasis: cell count overflows");
        cell_count_ *= cells_per_axis_[i];
    }
}

HypercubeBasis HypercubeBasis::isotropic(std::vector<double> center, double half_width, double edge,
                                         int degree) {
    const std::size_t d = center.size();
    return HypercubeBasis(std::move(center), std::vector<double>(d, half_width),
                          std::vector<double>(d, edge), degree);
}

bool HypercubeBasis::locate_axes(std::span<const double> x, std::span<std::size_t> axes) const {
    const std::size_t d = dimension();
    for (std::size_t i = 0; i < d; ++i) {
        const double v = x[i];
        if (!(v > lower_[i] && v <= upper_[i])) return false;
        // Right-closed cells: a point on a cell's left edge belongs to the
        // lower neighbour, hence ceil(.) - 1 rather than floor(.).
        const double u = std::ceil((v - lower_[i]) / edge_[i]);
        std::size_t idx = u >= 1.0 ? static_cast<std::size_t>(u) - 1 : 0;
        if (idx >= cells_per_axis_[i]) idx = cells_per_axis_[i] - 1;
        axes[i] = idx;
    }
    return true;
}

CellIndex HypercubeBasis::fold(std::span<const std::size_t> axes) const {
    CellIndex cell = 0;
    for (std::size_t i = 0; i < dimension(); ++i) cell = cell * cells_per_axis_[i] + axes[i];
    return cell;
}

void HypercubeBasis::unfold(CellIndex cell, std::span<std::size_t> axes) const {
    for (std::size_t i = dimension(); i-- > 0;) {
        axes[i] = static_cast<std::size_t>(cell % cells_per_axis_[i]);
        cell /= cells_per_axis_[i];
    }
}

std::optional<CellIndex> HypercubeBasis::locate(std::span<const double> x) const {
    thread_local std::vector<std::size_t> axes;
    axes.resize(dimension());
    if (!locate_axes(x, axes)) return std::nullopt;
    return fold(axes);
}

std::vector<double> HypercubeBasis::cell_center(CellIndex cell) const {
    std::vector<std::size_t> axes(dimension());
    unfold(cell, axes);
    std::vector<double> c(dimension());
    for (std::size_t i = 0; i < dimension(); ++i)
        c[i] = lower_[i] + (static_cast<double>(axes[i]) + 0.5) * edge_[i];
    return c;
}

void HypercubeBasis::local_features(CellIndex cell, std::span<const double> x, std::span<double> out) const {
    out[0] = 1.0;
    if (degree_ == 0) return;
    CellIndex rest = cell;
    for (std::size_t i = dimension(); i-- > 0;) {
        const auto a = static_cast<double>(rest % cells_per_axis_[i]);
        rest /= cells_per_axis_[i];
        out[1 + i] = x[i] - (lower_[i] + (a + 0.5) * edge_[i]);
    }
}

DesignRow HypercubeBasis::design_row(std::span<const double> x) const {
    DesignRow row;
    row.features.assign(functions_per_cell(), 0.0);
    row.cell = locate(x);
    if (row.cell) local_features(*row.cell, x, row.features);
    return row;
}

CoefficientVector::CoefficientVector(std::size_t functions_per_cell, std::vector<CellIndex> cells,
                                     std::vector<double> values)
    : functions_per_cell_(functions_per_cell), cells_(std::move(cells)), values_(std::move(values)) {
    if (values_.size() != cells_.size() * functions_per_cell_)
        throw std::invalid_argument("CoefficientVector: size mismatch");
    if (!std::is_sorted(cells_.begin(), cells_.end()))
        throw std::invalid_argument("CoefficientVector: cells must be sorted");
}

std::span<const double> CoefficientVector::cell(CellIndex cell) const {
    const auto it = std::lower_bound(cells_.begin(), cells_.end(), cell);
    if (it == cells_.end() || *it != cell) return {};
    const auto slot = static_cast<std::size_t>(it - cells_.begin());
    return {values_.data() + slot * functions_per_cell_, functions_per_cell_};
}

namespace {

double dot_local(const HypercubeBasis& basis, CellIndex cell, std::span<const double> coeffs,
                 std::span<const double> x) {
    if (basis.degree() == 0) return coeffs[0];
    thread_local std::vector<double> features;
    features.resize(basis.functions_per_cell());
    basis.local_features(cell, x, features);
    double v = 0.0;
    for (std::size_t j = 0; j < features.size(); ++j) v += coeffs[j] * features[j];
    return v;
}

}  // namespace

double evaluate(const HypercubeBasis& basis, const CoefficientVector& alpha, std::span<const double> x) {
    const auto cell = basis.locate(x);
    if (!cell) return 0.0;
    const auto coeffs = alpha.cell(*cell);
    if (coeffs.empty()) return 0.0;
    return dot_local(basis, *cell, coeffs, x);
}

namespace {
constexpr double kRankThreshold = 1e-10;
}

struct RegressionDesign::CellSolver {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> decomposition;
};

RegressionDesign::RegressionDesign(const HypercubeBasis& basis, std::span<const double> xs)
    : basis_(&basis), xs_(xs) {
    const std::size_t d = basis.dimension();
    if (xs.size() % d != 0) throw std::invalid_argument("RegressionDesign: sample array not a multiple of d");
    const std::size_t m_count = xs.size() / d;

    sample_cells_.resize(m_count);
    parallel_for(m_count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const auto c = basis.locate(xs.subspan(m * d, d));
            sample_cells_[m] = c ? static_cast<std::int64_t>(*c) : -1;
        }
    });

    order_.reserve(m_count);
    for (std::size_t m = 0; m < m_count; ++m)
        if (sample_cells_[m] >= 0) order_.push_back(m);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return sample_cells_[a] < sample_cells_[b]; });

    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
        const auto cell = static_cast<CellIndex>(sample_cells_[order_[pos]]);
        if (cells_.empty() || cells_.back() != cell) {
            cells_.push_back(cell);
            offsets_.push_back(pos);
        }
    }
    offsets_.push_back(order_.size());

    if (basis.degree() == 1) {
        const std::size_t fpc = basis.functions_per_cell();
        solvers_.resize(cells_.size());
        parallel_for(cells_.size(), [&](std::size_t begin, std::size_t end) {
            std::vector<double> features(fpc);
            for (std::size_t s = begin; s < end; ++s) {
                const std::size_t n = offsets_[s + 1] - offsets_[s];
                Eigen::MatrixXd a(n, fpc);
                for (std::size_t r = 0; r < n; ++r) {
                    const std::size_t m = order_[offsets_[s] + r];
                    basis.local_features(cells_[s], xs.subspan(m * d, d), features);
                    for (std::size_t j = 0; j < fpc; ++j) a(r, j) = features[j];
                }
                solvers_[s] = std::make_unique<CellSolver>();
                // Eigen's default (eps * size) lets rounding noise through when
                // all rows of a cell coincide; treat such columns as dependent.
                solvers_[s]->decomposition.setThreshold(kRankThreshold);
                solvers_[s]->decomposition.compute(a);
            }
        });
    }
}

RegressionDesign::~RegressionDesign() = default;
RegressionDesign::RegressionDesign(RegressionDesign&&) noexcept = default;
RegressionDesign& RegressionDesign::operator=(RegressionDesign&&) noexcept = default;

std::optional<CellIndex> RegressionDesign::cell_of(std::size_t m) const {
    const auto c = sample_cells_.at(m);
    if (c < 0) return std::nullopt;
    return static_cast<CellIndex>(c);
}

CoefficientVector RegressionDesign::fit(std::span<const double> targets) const {
    if (targets.size() != samples()) throw std::invalid_argument("RegressionDesign::fit: target length mismatch");
    const std::size_t fpc = basis_->functions_per_cell();
    std::vector<double> values(cells_.size() * fpc, 0.0);

    if (basis_->degree() == 0) {
        for (std::size_t s = 0; s < cells_.size(); ++s) {
            // Neumaier summation: cell means are chained over many time steps.
            double sum = 0.0, carry = 0.0;
            for (std::size_t pos = offsets_[s]; pos < offsets_[s + 1]; ++pos) {
                const double v = targets[order_[pos]];
                const double t = sum + v;
                carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
                sum = t;
            }
            values[s] = (sum + carry) / static_cast<double>(offsets_[s + 1] - offsets_[s]);
        }
    } else {
        parallel_for(cells_.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t s = begin; s < end; ++s) {
                const std::size_t n = offsets_[s + 1] - offsets_[s];
                Eigen::VectorXd rhs(n);
                for (std::size_t r = 0; r < n; ++r) rhs(r) = targets[order_[offsets_[s] + r]];
                const Eigen::VectorXd sol = solvers_[s]->decomposition.solve(rhs);
                for (std::size_t j = 0; j < fpc; ++j) values[s * fpc + j] = sol(j);
            }
        });
    }
    return CoefficientVector(fpc, cells_, std::move(values));
}

double RegressionDesign::evaluate(const CoefficientVector& alpha, std::size_t m) const {
    const auto c = sample_cells_[m];
    if (c < 0) return 0.0;
    const auto coeffs = alpha.cell(static_cast<CellIndex>(c));
    if (coeffs.empty()) return 0.0;
    const std::size_t d = basis_->dimension();
    return dot_local(*basis_, static_cast<CellIndex>(c), coeffs, xs_.subspan(m * d, d));
}

CoefficientVector fit(const HypercubeBasis& basis, std::span<const double> xs, std::span<const double> targets) {
    return RegressionDesign(basis, xs).fit(targets);
}

}  // namespace bsde
