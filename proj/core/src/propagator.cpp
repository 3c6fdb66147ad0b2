#include "qrg/propagator.hpp"

#include <cmath>
#include <complex>

#include "qrg/units.hpp"

namespace qrg {

using Eigen::MatrixXcd;
using std::complex;

void validate(const RadialGrid& grid) {
    if (!(grid.z_start < grid.z_end))
        throw DomainError("grid: z_start must be below z_end");
    if (grid.n_points < 3)
        throw DomainError("grid: need at least 3 points");
}

CouplingMatrixBuilder::CouplingMatrixBuilder(const MorseCasimirPotential& pot,
                                             const GratingSpec& g, const ChannelSet& channels,
                                             double mass_total, FormulaMode mode,
                                             const WoodsSaxonAbsorber* absorber)
    : pot_(pot),
      ns_(channels.n),
      kz2_(channels.kz2),
      two_m_over_hbar2_(2.0 * mass_total / units::hbar_sq) {
    if (ns_.empty()) throw DomainError("coupling matrix needs at least one channel");
    if (mass_total <= 0.0) throw DomainError("coupling matrix: mass must be positive");
    if (absorber) absorber_ = *absorber;

    int span = 0;
    for (int a : ns_)
        for (int b : ns_) span = std::max(span, std::abs(a - b));
    factor_.resize(span + 1, 0.0);
    for (int d = 1; d <= span; ++d) factor_[d] = coupling_factor(d, g, mode);
}

void CouplingMatrixBuilder::fill(double z, MatrixXcd& w) const {
    const int n = size();
    w.resize(n, n);
    const double v = two_m_over_hbar2_ * pot_(z);

    double ws[3] = {0.0, 0.0, 0.0};
    if (absorber_)
        for (int c = 0; c < 3; ++c)
            ws[c] = two_m_over_hbar2_ * absorber_->value(static_cast<ChannelClass>(c), z);

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            complex<double> off(factor_[std::abs(ns_[i] - ns_[j])] * v, 0.0);
            w(i, j) = off;
            w(j, i) = off;
        }
        int cls = static_cast<int>(channel_class(ns_[i]));
        w(i, i) = complex<double>(v - kz2_[i], -ws[cls]);
    }
}

MatrixXcd CouplingMatrixBuilder::operator()(double z) const {
    MatrixXcd w;
    fill(z, w);
    return w;
}

PropagationResult propagate(const RadialGrid& grid, const CouplingMatrixBuilder& builder,
                            InnerBoundary boundary) {
    validate(grid);
    const int np = grid.n_points;
    const int n = builder.size();
    const double h = grid.step();
    const double s = h * h / 12.0;

    MatrixXcd w(n, n), b(n, n), m(n, n), r(n, n), acc(n, n);
    Eigen::PartialPivLU<MatrixXcd> lu(n);
    double max_t = 0.0;

    // b <- I - T(z_j), tracking the largest Numerov step parameter ||T||.
    auto load = [&](int j) {
        builder.fill(grid.z(j), w);
        max_t = std::max(max_t, s * w.cwiseAbs().maxCoeff());
        b = (-s) * w;
        b.diagonal().array() += 1.0;
    };

    if (boundary == InnerBoundary::hard_wall) {
        // psi(z_0) = 0, so F_0 F_1^{-1} = 0.
        r.setZero(n, n);
    } else {
        // Local WKB: psi_0 psi_1^{-1} ~ diag(exp(-sqrt(W_nn(z_0)) h)) deep in
        // the forbidden region, so F_0 F_1^{-1} ~ (I-T_0) D (I-T_1)^{-1}.
        load(0);
        Eigen::VectorXcd decay(n);
        for (int i = 0; i < n; ++i) decay(i) = std::exp(-std::sqrt(w(i, i)) * h);
        MatrixXcd num = b * decay.asDiagonal();
        load(1);
        lu.compute(b.transpose());
        r = lu.solve(num.transpose()).transpose();
    }

    // R_j = (I-T_j) [12 I - (10 I + R_{j-1})(I-T_j)]^{-1}, j = 1 .. J-1.
    for (int j = 1; j <= np - 2; ++j) {
        load(j);
        acc.noalias() = r * b;
        acc += 10.0 * b;
        m = -acc;
        m.diagonal().array() += 12.0;
        lu.compute(m.transpose());
        r = lu.solve(b);
        r.transposeInPlace();
        if ((j & 1023) == 0 && !r.allFinite())
            throw NumericalBlowup("propagation produced non-finite values near z = " +
                                  std::to_string(grid.z(j)));
    }
    if (!r.allFinite())
        throw NumericalBlowup("propagation produced non-finite values at the outer edge");

    PropagationResult out;
    out.ratio = std::move(r);
    out.imt_prev = b;  // last loop iteration loaded z_{J-1}
    load(np - 1);
    out.imt_end = b;
    out.z_prev = grid.z(np - 2);
    out.z_end = grid.z(np - 1);
    out.step = h;
    out.steps = np - 2;
    out.max_step_param = max_t;
    out.error_estimate = max_t * max_t * max_t;
    return out;
}

} // namespace qrg
