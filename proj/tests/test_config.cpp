#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include <qrg/config.hpp>
#include <qrg/units.hpp>

using namespace qrg;

TEST_CASE("species presets reproduce the published parameter set") {
    RunConfig cfg = config_for_species("He");
    CHECK(cfg.species.atom_mass == doctest::Approx(4.002602));
    CHECK(cfg.species.cluster_count == 1);
    CHECK(cfg.species.chi == 0.5);
    CHECK(cfg.species.l == 93.0);
    CHECK(cfg.species.c3 == doctest::Approx(3.5e-50 * units::joule_m3_meV_A3).epsilon(1e-12));
    CHECK(cfg.species.grid.z_start == -10.0);
    CHECK(cfg.species.grid.z_end == 500.0);
    CHECK(cfg.species.grid.n_points == 10000);
    CHECK(cfg.species.absorber.z_i == -10.0);
    CHECK(cfg.grating.period == doctest::Approx(2e5));
    CHECK(cfg.grating.strip_width == doctest::Approx(1e5));
    CHECK(cfg.solver.grid.has_value());
    CHECK(cfg.solver.grid->n_points == 10000);
    CHECK(cfg.efficiency_orders == std::vector<int>{0, -1, -2, -3});

    RunConfig he3 = config_for_species("He3");
    CHECK(he3.species.cluster_count == 3);
    CHECK(he3.species.chi == 0.405);
    CHECK(he3.species.grid.z_end == 1000.0);
    CHECK(he3.species.scan_t0 == 8.7);

    CHECK_THROWS_AS(config_for_species("Xe"), ValidationError);
}

TEST_CASE("species block: preset string or override object") {
    RunConfig a = parse_config_text(R"({"species": "Ne"})");
    CHECK(a.species.name == "Ne");
    CHECK(a.species.atom_mass == doctest::Approx(20.1797));

    RunConfig b = parse_config_text(R"({
        "species": {
            "name": "He",
            "chi": "0.6 1/A",
            "c3": "4.0e-50 J*m^3",
            "l": "95 A",
            "cluster_count": 2,
            "atom_mass": "4.0026 amu"
        }
    })");
    CHECK(b.species.chi == doctest::Approx(0.6));
    CHECK(b.species.c3 == doctest::Approx(4.0e-50 * units::joule_m3_meV_A3));
    CHECK(b.species.l == 95.0);
    CHECK(b.species.cluster_count == 2);
    CHECK(b.species.atom_mass == doctest::Approx(4.0026));
    // the absorber ramp inherits the overridden stiffness
    CHECK(b.species.absorber.chi == doctest::Approx(0.6));

    CHECK_THROWS_AS(parse_config_text(R"({"species": 7})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": {"chi": "0.6 1/A"}})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": {"name": "He", "chi": "-1 1/A"}})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": {"name": "He", "cluster_count": 0}})"),
                    ValidationError);
}

TEST_CASE("absorber and grid overrides") {
    RunConfig cfg = parse_config_text(R"({
        "species": {
            "name": "He",
            "absorber": {
                "z_i": "-10 A",
                "specular": {"amplitude": "1e-3 Ha", "alpha": 0.4},
                "other": {"alpha": "0.25"}
            }
        }
    })");
    CHECK(cfg.species.absorber.amplitude_for(ChannelClass::specular) ==
          doctest::Approx(1e-3 * units::hartree_meV).epsilon(1e-12));
    CHECK(cfg.species.absorber.alpha_for(ChannelClass::specular) == 0.4);
    CHECK(cfg.species.absorber.alpha_for(ChannelClass::other) == 0.25);
    // untouched classes keep preset values
    CHECK(cfg.species.absorber.alpha_for(ChannelClass::first_order) == 0.1);
    CHECK(cfg.warnings.empty());

    RunConfig moved = parse_config_text(R"({
        "species": {"name": "He", "absorber": {"z_i": "-5 A"}}
    })");
    REQUIRE(moved.warnings.size() == 1);
    CHECK(moved.warnings[0].find("z_i") != std::string::npos);

    RunConfig grid = parse_config_text(R"({
        "species": {"name": "He",
                    "grid": {"z_start": "-10 A", "z_end": "0.2 um", "points": 40000}}
    })");
    CHECK(grid.species.grid.z_end == doctest::Approx(2000.0));
    CHECK(grid.species.grid.n_points == 40000);
    CHECK(grid.solver.grid->n_points == 40000);  // solver grid follows the species

    CHECK_THROWS_AS(parse_config_text(R"({
        "species": {"name": "He", "grid": {"z_start": "600 A"}}
    })"), ValidationError);  // z_start above z_end
}

TEST_CASE("solver block") {
    RunConfig cfg = parse_config_text(R"({
        "species": "He",
        "solver": {"channels": 61, "absorber": false, "formula_mode": "fourier_consistent",
                   "boundary": "wkb_decay", "max_condition": 1e10}
    })");
    CHECK(cfg.solver.n_max == 30);
    CHECK(!cfg.solver.absorber);
    CHECK(cfg.solver.mode == FormulaMode::fourier_consistent);
    CHECK(cfg.solver.boundary == InnerBoundary::wkb_decay);
    CHECK(cfg.max_condition == 1e10);

    CHECK(parse_config_text(R"({"species": "He", "solver": {"channels": 1}})").solver.n_max == 0);
    for (const char* bad : {"0", "-3", "4", "2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_config_text(std::string(R"({"species": "He", "solver": {"channels": )") +
                                          bad + "}}"),
                        ValidationError);
    }
    CHECK_THROWS_AS(parse_config_text(R"({"species": "He", "solver": {"boundary": "firm"}})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": "He", "solver": {"formula_mode": "x"}})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": "He", "solver": {"absorber": 1}})"),
                    ValidationError);
}

TEST_CASE("beam and sweep blocks") {
    RunConfig cfg = parse_config_text(R"({
        "species": "He",
        "beam": {"t0": "20 K", "angle": "4.5 mrad"},
        "sweep": {"wavelength": "0.179 nm", "angles": ["3 mrad", "4 mrad", "0.005 rad"]},
        "efficiency_orders": [0, -1, 5]
    })");
    CHECK(cfg.beam_t0.has_value());
    CHECK(*cfg.beam_t0 == 20.0);
    CHECK(*cfg.beam_angle == doctest::Approx(4.5e-3));
    CHECK(!cfg.beam_wavelength.has_value());
    CHECK(!cfg.sweep_t0.has_value());
    CHECK(*cfg.sweep_wavelength == doctest::Approx(1.79));
    REQUIRE(cfg.sweep_angles.size() == 3);
    CHECK(cfg.sweep_angles[0] == doctest::Approx(3e-3));
    CHECK(cfg.sweep_angles[2] == doctest::Approx(5e-3));
    CHECK(cfg.efficiency_orders == std::vector<int>{0, -1, 5});

    CHECK_THROWS_AS(parse_config_text(R"({
        "species": "He", "sweep": {"t0": "20 K", "wavelength": "0.179 nm"}
    })"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({
        "species": "He", "efficiency_orders": [0.5]
    })"), ValidationError);
}

TEST_CASE("physical quantities must carry units") {
    CHECK_THROWS_AS(parse_config_text(R"({"species": {"name": "He", "chi": 0.5}})"), UnitError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": "He", "beam": {"angle": 0.0045}})"),
                    UnitError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": "He",
        "sweep": {"angles": [0.003]}})"), UnitError);
    CHECK_THROWS_AS(parse_config_text(R"({"species": {"name": "He", "chi": "0.5 K"}})"),
                    UnitError);
    // alpha is dimensionless: bare numbers and unitless strings both work
    CHECK_NOTHROW(parse_config_text(R"({
        "species": {"name": "He", "absorber": {"specular": {"alpha": 0.5}}}})"));
    CHECK_NOTHROW(parse_config_text(R"({
        "species": {"name": "He", "absorber": {"specular": {"alpha": "0.5"}}}})"));
}

TEST_CASE("unknown keys are named with their block") {
    try {
        parse_config_text(R"({"species": "He", "solvr": {}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("solvr") != std::string::npos);
        CHECK(msg.find("top-level") != std::string::npos);
    }
    try {
        parse_config_text(R"({"species": {"name": "He", "boost": 2}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("species") != std::string::npos);
        CHECK(std::string(e.what()).find("boost") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text(R"({
        "species": {"name": "He", "absorber": {"specular": {"amp": "1e-3 Ha"}}}
    })"), ValidationError);
}

TEST_CASE("grating block and the gapless warning") {
    RunConfig cfg = parse_config_text(R"({
        "species": "He",
        "grating": {"period": "30 um", "strip_width": "12 um", "max_order": 40}
    })");
    CHECK(cfg.grating.period == doctest::Approx(3e5));
    CHECK(cfg.grating.strip_width == doctest::Approx(1.2e5));
    CHECK(cfg.grating.max_fourier_order == 40);

    RunConfig gapless = parse_config_text(R"({
        "species": "He", "grating": {"period": "20 um", "strip_width": "20 um"}
    })");
    REQUIRE(gapless.warnings.size() == 1);
    CHECK(gapless.warnings[0].find("diffraction is disabled") != std::string::npos);

    CHECK_THROWS_AS(parse_config_text(R"({
        "species": "He", "grating": {"strip_width": "25 um"}
    })"), ValidationError);  // wider than the period
}

TEST_CASE("malformed input: parse vs validation errors") {
    // empty or blank text is a validation problem (nothing configured)...
    CHECK_THROWS_AS(parse_config_text(""), ValidationError);
    CHECK_THROWS_AS(parse_config_text("  \n\t  \n"), ValidationError);
    // ...while broken JSON is a parse problem with file:line:column
    try {
        parse_config_text("{\n  \"species\": \"He\",\n  }", "demo.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("demo.json:3:") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("{}"), ValidationError);          // no species
    CHECK_THROWS_AS(parse_config_text("[1, 2]"), ValidationError);      // not an object
    CHECK_THROWS_AS(parse_config_text("null"), ValidationError);
    CHECK_THROWS_AS(parse_config("/nonexistent/qrg.json"), ParseError);

    try {
        parse_config_text("{}");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("species") != std::string::npos);
    }
}

TEST_CASE("resolved config echo round-trips exactly") {
    RunConfig cfg = parse_config_text(R"({
        "species": {"name": "He2", "chi": "0.44 1/A"},
        "solver": {"channels": 21, "absorber": true},
        "beam": {"wavelength": "0.179 nm", "angle": "4.5 mrad"},
        "sweep": {"t0": "15 K", "angles": ["3.4 mrad", "5.2 mrad"]},
        "efficiency_orders": [0, -1]
    })");
    std::string echo = resolved_config_json(cfg);
    RunConfig back = parse_config_text(echo, "<echo>");
    CHECK(resolved_config_json(back) == echo);

    CHECK(back.species.chi == cfg.species.chi);
    CHECK(back.species.cluster_count == cfg.species.cluster_count);
    CHECK(back.solver.n_max == cfg.solver.n_max);
    CHECK(back.beam_wavelength.has_value());
    CHECK(*back.beam_wavelength == *cfg.beam_wavelength);
    CHECK(*back.beam_angle == *cfg.beam_angle);
    CHECK(*back.sweep_t0 == *cfg.sweep_t0);
    CHECK(back.sweep_angles == cfg.sweep_angles);
    CHECK(back.efficiency_orders == cfg.efficiency_orders);

    // the preset-only config echoes and round-trips too
    RunConfig he = config_for_species("He");
    std::string echo2 = resolved_config_json(he);
    RunConfig back2 = parse_config_text(echo2);
    CHECK(resolved_config_json(back2) == echo2);
    CHECK(back2.species.c3 == he.species.c3);
    CHECK(back2.species.grid.n_points == he.species.grid.n_points);
}
