#include "qrg/kinematics.hpp"

#include <cmath>

#include "qrg/units.hpp"

namespace qrg {

using units::pi;

BeamKinematics beam_kinematics(const BeamSpec& beam) {
    if (!(beam.atom_mass > 0.0))
        throw DomainError("beam: atom mass must be positive");
    if (beam.cluster_count < 1)
        throw DomainError("beam: cluster count must be at least 1");
    if (!(beam.grazing_angle > 0.0 && beam.grazing_angle < pi / 2.0))
        throw DomainError("beam: grazing angle must lie in (0, pi/2)");
    if (!beam.source_temperature && !beam.wavelength)
        throw DomainError("beam: give a source temperature or a de Broglie wavelength");

    double m = beam.atom_mass;
    double n = beam.cluster_count;

    auto k_from_t0 = [&](double t0) {
        return n * std::sqrt(5.0 * m * units::k_boltzmann * t0 / units::hbar_sq);
    };

    double k_i;
    if (beam.source_temperature) {
        double t0 = *beam.source_temperature;
        if (!(t0 > 0.0)) throw DomainError("beam: source temperature must be positive");
        k_i = k_from_t0(t0);
        if (beam.wavelength) {
            double k_from_lambda = 2.0 * pi / *beam.wavelength;
            if (std::abs(k_i - k_from_lambda) > 1e-9 * k_i)
                throw InconsistentSpec("beam: source temperature and wavelength disagree");
        }
    } else {
        if (!(*beam.wavelength > 0.0)) throw DomainError("beam: wavelength must be positive");
        k_i = 2.0 * pi / *beam.wavelength;
    }

    BeamKinematics kin;
    kin.mass_total = n * m;
    kin.k_i = k_i;
    kin.t0 = units::hbar_sq * k_i * k_i / (5.0 * m * n * n * units::k_boltzmann);
    kin.wavelength = 2.0 * pi / k_i;
    kin.k_perp = k_i * std::sin(beam.grazing_angle);
    kin.energy = n * 2.5 * units::k_boltzmann * kin.t0;
    kin.grazing_angle = beam.grazing_angle;
    return kin;
}

double channel_kz2(const BeamKinematics& kin, const GratingSpec& g, int n) {
    double k_par = kin.k_i * std::cos(kin.grazing_angle) + 2.0 * pi * n / g.period;
    return kin.k_i * kin.k_i - k_par * k_par;
}

int ChannelSet::index_of(int nn) const {
    for (int i = 0; i < size(); ++i)
        if (n[i] == nn) return i;
    return -1;
}

int ChannelSet::count_open() const {
    int c = 0;
    for (bool o : open) c += o;
    return c;
}

ChannelSet build_channels(const BeamKinematics& kin, const GratingSpec& g, int n_max) {
    if (n_max < 0) throw DomainError("build_channels: n_max must be >= 0");
    ChannelSet cs;
    cs.period = g.period;
    cs.k_i = kin.k_i;
    for (int n = -n_max; n <= n_max; ++n) {
        double kz2 = channel_kz2(kin, g, n);
        cs.n.push_back(n);
        cs.kz2.push_back(kz2);
        cs.open.push_back(kz2 > 0.0);
    }
    return cs;
}

ChannelSet open_only(const ChannelSet& cs) {
    ChannelSet out;
    out.period = cs.period;
    out.k_i = cs.k_i;
    for (int i = 0; i < cs.size(); ++i) {
        if (!cs.open[i]) continue;
        out.n.push_back(cs.n[i]);
        out.kz2.push_back(cs.kz2[i]);
        out.open.push_back(true);
    }
    return out;
}

std::vector<BraggAngle> bragg_angles(const BeamKinematics& kin, const GratingSpec& g,
                                     int n_abs_max) {
    std::vector<BraggAngle> out;
    double cos_i = std::cos(kin.grazing_angle);
    for (int n = -n_abs_max; n <= n_abs_max; ++n) {
        double c = cos_i - n * kin.wavelength / g.period;
        if (c < -1.0 || c > 1.0) continue;
        out.push_back({n, std::acos(c)});
    }
    return out;
}

RayleighTable rayleigh_angles(double wavelength, double period, int n_abs_max) {
    if (!(wavelength > 0.0) || !(period > 0.0))
        throw DomainError("rayleigh_angles: wavelength and period must be positive");
    RayleighTable table;
    for (int a = 1; a <= n_abs_max; ++a) {
        for (int n : {-a, a}) {
            double c = 1.0 + n * wavelength / period;
            if (c < -1.0 || c > 1.0 || n > 0) continue;  // only n < 0 is ever real
            table.rows.push_back({n, std::acos(c)});
        }
    }
    return table;
}

} // namespace qrg
