#include "qrg/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "qrg/units.hpp"

namespace qrg {

namespace {

constexpr double rad_to_mrad = 1e3;
constexpr double invA_to_invnm = 10.0;

int specular_index(const ScatteringSolution& sol) {
    for (size_t c = 0; c < sol.n.size(); ++c)
        if (sol.n[c] == 0) return static_cast<int>(c);
    return -1;
}

} // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

void write_solution_csv(std::ostream& os, const ScatteringSolution& sol) {
    os << "n,kz2_invA2,open,emerging,re_s,im_s,intensity,efficiency\n";
    std::vector<size_t> order(sol.n.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return -sol.n[a] < -sol.n[b]; });
    for (size_t i : order) {
        os << -sol.n[i] << ',' << format_number(sol.kz2[i]) << ',' << (sol.open[i] ? 1 : 0)
           << ',' << (sol.emerging[i] ? 1 : 0) << ',' << format_number(sol.s[i].real()) << ','
           << format_number(sol.s[i].imag()) << ',' << format_number(sol.intensity[i]) << ','
           << format_number(sol.efficiency[i]) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "theta_mrad,k_perp_invnm,p_qr,one_minus_p_qr,specular_intensity,open_channels\n";
    for (const SweepPoint& pt : result.points) {
        if (!pt.ok) continue;
        int i0 = specular_index(pt.solution);
        os << format_number(pt.angle * rad_to_mrad) << ','
           << format_number(pt.k_perp * invA_to_invnm) << ','
           << format_number(pt.solution.p_qr) << ','
           << format_number(1.0 - pt.solution.p_qr) << ','
           << format_number(i0 >= 0 ? pt.solution.intensity[i0] : 0.0) << ','
           << pt.solution.open_count << '\n';
    }
}

void write_efficiency_csv(std::ostream& os, const SweepResult& result,
                          const std::vector<int>& orders, bool normalized) {
    os << "theta_mrad,k_perp_invnm,p_qr";
    for (int n : orders) os << ",eff_" << n;
    os << ",open_channels\n";

    std::vector<std::vector<double>> series;
    for (int n : orders) {
        auto s = efficiency_series(result, n);
        series.push_back(normalized ? peak_normalized(std::move(s)) : std::move(s));
    }

    for (size_t i = 0; i < result.points.size(); ++i) {
        const SweepPoint& pt = result.points[i];
        if (!pt.ok) continue;
        os << format_number(pt.angle * rad_to_mrad) << ','
           << format_number(pt.k_perp * invA_to_invnm) << ','
           << format_number(pt.solution.p_qr);
        for (const auto& s : series) os << ',' << format_number(s[i]);
        os << ',' << pt.solution.open_count << '\n';
    }
}

void write_rayleigh_csv(std::ostream& os, const RayleighTable& table) {
    os << "n,theta_R_mrad\n";
    for (const auto& row : table.rows)
        os << row.n << ',' << format_number(row.theta_R * rad_to_mrad) << '\n';
}

void write_potential_csv(std::ostream& os, const MorseCasimirPotential& pot, double z_min,
                         double z_max, int n_points) {
    if (n_points < 2) throw DomainError("potential dump needs at least 2 points");
    os << "z_A,v_meV\n";
    double h = (z_max - z_min) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        double z = z_min + i * h;
        os << format_number(z) << ',' << format_number(pot(z)) << '\n';
    }
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "stage,channels,points,z_end_A,ok,p_qr,specular_intensity\n";
    for (const auto& row : report.rows) {
        os << row.stage << ',' << row.channels << ',' << row.points << ','
           << format_number(row.z_end) << ',' << (row.ok ? 1 : 0) << ','
           << format_number(row.p_qr) << ',' << format_number(row.specular) << '\n';
    }
}

} // namespace qrg
