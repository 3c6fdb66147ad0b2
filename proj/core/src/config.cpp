#include "qrg/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrg/units.hpp"

namespace qrg {

using nlohmann::json;
using nlohmann::ordered_json;
using units::Dim;

namespace {

[[noreturn]] void parse_error_at(const std::string& text, const std::string& origin,
                                 size_t byte, const std::string& what) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                     what);
}

void check_keys(const json& obj, const char* block, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw ValidationError("unknown key '" + it.key() + "' in " + block + " block");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double quantity(const json& v, Dim dim, const std::string& where) {
    if (v.is_string()) return units::parse_quantity(v.get<std::string>(), dim);
    if (v.is_number() && dim == Dim::dimensionless) return v.get<double>();
    if (v.is_number())
        throw UnitError(where + ": bare number; physical quantities need a unit string");
    throw ValidationError(where + ": expected a quantity string");
}

void maybe_quantity(const json& obj, const char* key, Dim dim, const char* block, double& out) {
    if (const json* v = find(obj, key)) out = quantity(*v, dim, std::string(block) + "." + key);
}

void maybe_int(const json& obj, const char* key, const char* block, int& out) {
    if (const json* v = find(obj, key)) {
        if (!v->is_number_integer())
            throw ValidationError(std::string(block) + "." + key + ": expected an integer");
        out = v->get<int>();
    }
}

void parse_absorber_class(const json& obj, const char* block, WoodsSaxonAbsorber& abs,
                          ChannelClass cls) {
    check_keys(obj, block, {"amplitude", "alpha"});
    if (const json* v = find(obj, "amplitude"))
        abs.amplitude_for(cls) = quantity(*v, Dim::energy, std::string(block) + ".amplitude");
    if (const json* v = find(obj, "alpha"))
        abs.alpha_for(cls) = quantity(*v, Dim::dimensionless, std::string(block) + ".alpha");
}

Species parse_species(const json& node, std::vector<std::string>& warnings) {
    if (node.is_string()) return species_preset(node.get<std::string>());
    if (!node.is_object())
        throw ValidationError("species: expected a preset name or an object with 'name'");

    check_keys(node, "species",
               {"name", "atom_mass", "cluster_count", "chi", "c3", "l", "absorber", "grid"});
    const json* name = find(node, "name");
    if (!name || !name->is_string())
        throw ValidationError("species.name: required preset name (He, He2, He3, Ne)");

    Species sp = species_preset(name->get<std::string>());
    maybe_quantity(node, "atom_mass", Dim::mass, "species", sp.atom_mass);
    maybe_int(node, "cluster_count", "species", sp.cluster_count);
    maybe_quantity(node, "chi", Dim::inverse_length, "species", sp.chi);
    maybe_quantity(node, "c3", Dim::c3, "species", sp.c3);
    maybe_quantity(node, "l", Dim::length, "species", sp.l);

    if (const json* a = find(node, "absorber")) {
        check_keys(*a, "species.absorber", {"z_i", "specular", "first_order", "other"});
        maybe_quantity(*a, "z_i", Dim::length, "species.absorber", sp.absorber.z_i);
        if (const json* c = find(*a, "specular"))
            parse_absorber_class(*c, "species.absorber.specular", sp.absorber,
                                 ChannelClass::specular);
        if (const json* c = find(*a, "first_order"))
            parse_absorber_class(*c, "species.absorber.first_order", sp.absorber,
                                 ChannelClass::first_order);
        if (const json* c = find(*a, "other"))
            parse_absorber_class(*c, "species.absorber.other", sp.absorber, ChannelClass::other);
    }

    if (const json* g = find(node, "grid")) {
        check_keys(*g, "species.grid", {"z_start", "z_end", "points"});
        maybe_quantity(*g, "z_start", Dim::length, "species.grid", sp.grid.z_start);
        maybe_quantity(*g, "z_end", Dim::length, "species.grid", sp.grid.z_end);
        maybe_int(*g, "points", "species.grid", sp.grid.n_points);
    }

    if (sp.cluster_count < 1) throw ValidationError("species.cluster_count: must be >= 1");
    if (!(sp.atom_mass > 0)) throw ValidationError("species.atom_mass: must be positive");
    if (!(sp.chi > 0) || !(sp.c3 > 0) || !(sp.l > 0))
        throw ValidationError("species: chi, c3, l must be positive");
    try {
        validate(sp.grid);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("species.grid: ") + e.what());
    }
    if (sp.grid.z_start != sp.absorber.z_i)
        warnings.push_back("absorber z_i differs from grid z_start; the ramp midpoint is off "
                           "the grid edge");
    sp.absorber.chi = sp.chi;  // the ramp shares the Morse stiffness
    return sp;
}

RunConfig parse_json(const json& root) {
    if (!root.is_object()) throw ValidationError("config root must be an object");
    check_keys(root, "top-level",
               {"species", "grating", "solver", "beam", "sweep", "efficiency_orders"});

    RunConfig cfg;
    const json* species = find(root, "species");
    if (!species) throw ValidationError("config has no species block");
    cfg.species = parse_species(*species, cfg.warnings);
    cfg.grating = default_grating();
    cfg.solver.grid = cfg.species.grid;

    if (const json* g = find(root, "grating")) {
        check_keys(*g, "grating", {"period", "strip_width", "max_order"});
        maybe_quantity(*g, "period", Dim::length, "grating", cfg.grating.period);
        maybe_quantity(*g, "strip_width", Dim::length, "grating", cfg.grating.strip_width);
        maybe_int(*g, "max_order", "grating", cfg.grating.max_fourier_order);
    }
    try {
        validate(cfg.grating);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("grating: ") + e.what());
    }
    if (cfg.grating.strip_width == cfg.grating.period)
        cfg.warnings.push_back("grating has no gaps (a = d): all couplings vanish and "
                               "diffraction is disabled");

    if (const json* s = find(root, "solver")) {
        check_keys(*s, "solver",
                   {"channels", "absorber", "formula_mode", "boundary", "max_condition"});
        if (const json* v = find(*s, "channels")) {
            if (!v->is_number_integer() || v->get<int>() < 1 || v->get<int>() % 2 == 0)
                throw ValidationError("solver.channels: expected an odd positive integer");
            cfg.solver.n_max = (v->get<int>() - 1) / 2;
        }
        if (const json* v = find(*s, "absorber")) {
            if (!v->is_boolean()) throw ValidationError("solver.absorber: expected a boolean");
            cfg.solver.absorber = v->get<bool>();
        }
        if (const json* v = find(*s, "formula_mode")) {
            if (!v->is_string()) throw ValidationError("solver.formula_mode: expected a string");
            try {
                cfg.solver.mode = parse_formula_mode(v->get<std::string>());
            } catch (const InvalidMode& e) {
                throw ValidationError(std::string("solver.formula_mode: ") + e.what());
            }
        }
        if (const json* v = find(*s, "boundary")) {
            std::string b = v->is_string() ? v->get<std::string>() : "";
            if (b == "hard_wall")
                cfg.solver.boundary = InnerBoundary::hard_wall;
            else if (b == "wkb_decay")
                cfg.solver.boundary = InnerBoundary::wkb_decay;
            else
                throw ValidationError("solver.boundary: expected hard_wall or wkb_decay");
        }
        if (const json* v = find(*s, "max_condition")) {
            if (!v->is_number()) throw ValidationError("solver.max_condition: expected a number");
            cfg.max_condition = v->get<double>();
        }
    }

    if (const json* b = find(root, "beam")) {
        check_keys(*b, "beam", {"t0", "wavelength", "angle"});
        double tmp;
        if (find(*b, "t0")) {
            maybe_quantity(*b, "t0", Dim::temperature, "beam", tmp);
            cfg.beam_t0 = tmp;
        }
        if (find(*b, "wavelength")) {
            maybe_quantity(*b, "wavelength", Dim::length, "beam", tmp);
            cfg.beam_wavelength = tmp;
        }
        if (find(*b, "angle")) {
            maybe_quantity(*b, "angle", Dim::angle, "beam", tmp);
            cfg.beam_angle = tmp;
        }
    }

    if (const json* s = find(root, "sweep")) {
        check_keys(*s, "sweep", {"t0", "wavelength", "angles"});
        double tmp;
        if (find(*s, "t0")) {
            maybe_quantity(*s, "t0", Dim::temperature, "sweep", tmp);
            cfg.sweep_t0 = tmp;
        }
        if (find(*s, "wavelength")) {
            maybe_quantity(*s, "wavelength", Dim::length, "sweep", tmp);
            cfg.sweep_wavelength = tmp;
        }
        if (const json* a = find(*s, "angles")) {
            if (!a->is_array()) throw ValidationError("sweep.angles: expected an array");
            for (const json& v : *a)
                cfg.sweep_angles.push_back(quantity(v, Dim::angle, "sweep.angles[]"));
        }
        if (cfg.sweep_t0 && cfg.sweep_wavelength)
            throw ValidationError("sweep: give t0 or wavelength, not both");
    }

    if (const json* o = find(root, "efficiency_orders")) {
        if (!o->is_array()) throw ValidationError("efficiency_orders: expected an array");
        cfg.efficiency_orders.clear();
        for (const json& v : *o) {
            if (!v.is_number_integer())
                throw ValidationError("efficiency_orders: expected integers");
            cfg.efficiency_orders.push_back(v.get<int>());
        }
    }
    return cfg;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ValidationError("config has no species block (" + origin + " is empty)");
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        parse_error_at(text, origin, e.byte > 0 ? e.byte - 1 : 0, e.what());
    }
    return parse_json(root);
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

RunConfig config_for_species(std::string_view name) {
    RunConfig cfg;
    cfg.species = species_preset(name);
    cfg.grating = default_grating();
    cfg.solver.grid = cfg.species.grid;
    return cfg;
}

std::string resolved_config_json(const RunConfig& cfg) {
    auto qty = [](double v, const char* unit) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v << ' ' << unit;
        return ss.str();
    };

    ordered_json j;
    const Species& sp = cfg.species;
    j["species"] = {
        {"name", sp.name},
        {"atom_mass", qty(sp.atom_mass, "amu")},
        {"cluster_count", sp.cluster_count},
        {"chi", qty(sp.chi, "1/A")},
        {"c3", qty(sp.c3, "meV*A^3")},
        {"l", qty(sp.l, "A")},
        {"absorber",
         {{"z_i", qty(sp.absorber.z_i, "A")},
          {"specular",
           {{"amplitude", qty(sp.absorber.amplitude[0], "meV")},
            {"alpha", sp.absorber.alpha[0]}}},
          {"first_order",
           {{"amplitude", qty(sp.absorber.amplitude[1], "meV")},
            {"alpha", sp.absorber.alpha[1]}}},
          {"other",
           {{"amplitude", qty(sp.absorber.amplitude[2], "meV")},
            {"alpha", sp.absorber.alpha[2]}}}}},
        {"grid",
         {{"z_start", qty(sp.grid.z_start, "A")},
          {"z_end", qty(sp.grid.z_end, "A")},
          {"points", sp.grid.n_points}}},
    };
    j["grating"] = {{"period", qty(cfg.grating.period, "A")},
                    {"strip_width", qty(cfg.grating.strip_width, "A")},
                    {"max_order", cfg.grating.max_fourier_order}};
    j["solver"] = {{"channels", 2 * cfg.solver.n_max + 1},
                   {"absorber", cfg.solver.absorber},
                   {"formula_mode", std::string(to_string(cfg.solver.mode))},
                   {"boundary", cfg.solver.boundary == InnerBoundary::hard_wall ? "hard_wall"
                                                                                : "wkb_decay"},
                   {"max_condition", cfg.max_condition}};
    if (cfg.beam_t0 || cfg.beam_wavelength || cfg.beam_angle) {
        ordered_json b;
        if (cfg.beam_t0) b["t0"] = qty(*cfg.beam_t0, "K");
        if (cfg.beam_wavelength) b["wavelength"] = qty(*cfg.beam_wavelength, "A");
        if (cfg.beam_angle) b["angle"] = qty(*cfg.beam_angle, "rad");
        j["beam"] = b;
    }
    if (cfg.sweep_t0 || cfg.sweep_wavelength || !cfg.sweep_angles.empty()) {
        ordered_json s;
        if (cfg.sweep_t0) s["t0"] = qty(*cfg.sweep_t0, "K");
        if (cfg.sweep_wavelength) s["wavelength"] = qty(*cfg.sweep_wavelength, "A");
        if (!cfg.sweep_angles.empty()) {
            ordered_json arr = ordered_json::array();
            for (double a : cfg.sweep_angles) arr.push_back(qty(a, "rad"));
            s["angles"] = arr;
        }
        j["sweep"] = s;
    }
    j["efficiency_orders"] = cfg.efficiency_orders;
    return j.dump(2) + "\n";
}

} // namespace qrg
