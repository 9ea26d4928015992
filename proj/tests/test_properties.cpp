// Module invariants as one runnable target.
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <cstring>

#include "cli.hpp"
#include "qgbec/constants.hpp"
#include "qgbec/cube_potential.hpp"
#include "qgbec/errors.hpp"
#include "qgbec/experiment.hpp"
#include "qgbec/spectrum.hpp"
#include "qgbec/thermo.hpp"
#include "support.hpp"

using namespace qgbec;
using cube::ModeIndex;
using spectrum::GravityTheory;

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

std::vector<ModeIndex> orbit(ModeIndex m) {
  std::array<int, 3> v{m.nx, m.ny, m.nz};
  std::sort(v.begin(), v.end());
  std::vector<ModeIndex> out;
  do {
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) out.push_back({sx * v[0], sy * v[1], sz * v[2]});
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

constexpr std::array<ModeIndex, 5> kAxisModes{ModeIndex{1, 0, 0}, ModeIndex{2, 0, 0}, ModeIndex{3, 0, 0},
                                              ModeIndex{4, 0, 0}, ModeIndex{5, 0, 0}};

}  // namespace

TEST_SUITE("constants") {
  TEST_CASE("constants are positive") {
    const auto& k = units::kConstants;
    CHECK(k.hbar > 0);
    CHECK(k.G > 0);
    CHECK(k.k_B > 0);
    CHECK(k.c > 0);
    CHECK(k.u > 0);
  }

  TEST_CASE("species invariants") {
    CHECK_THROWS_AS(units::make_species("x", 0.0, 1.0, 0.0), Error);
    CHECK_THROWS_AS(units::make_species("x", 1.0, 1.0, -1.0), Error);
    CHECK_NOTHROW(units::make_species("x", 1.0, -3.0, 0.0));
  }

  TEST_CASE("derived quantities are pure and scale correctly") {
    const auto p = test::yb_gas(1e16);
    const auto a = units::derived_quantities(p);
    const auto b = units::derived_quantities(p);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    CHECK(a.volume == p.box_length() * p.box_length() * p.box_length());
    CHECK(a.density == p.atom_count() / a.volume);

    const auto& yb = test::ytterbium();
    const double base = units::contact_coupling(yb);
    const auto twice_a = units::make_species("a2", yb.mass_u(), 2 * yb.scattering_length_nm(), 0.0);
    const auto twice_m = units::make_species("m2", 2 * yb.mass_u(), yb.scattering_length_nm(), 0.0);
    CHECK(units::contact_coupling(twice_a) == doctest::Approx(2 * base).epsilon(1e-14));
    CHECK(units::contact_coupling(twice_m) == doctest::Approx(base / 2).epsilon(1e-14));
  }

  TEST_CASE("gas parameter invariants") {
    CHECK_THROWS_AS(test::yb_gas(0.5), Error);
    CHECK_THROWS_AS(test::yb_gas(1e16, 0.0), Error);
    const auto p = test::yb_gas(1e16, 0.02);
    CHECK(p.with_box_length(0.01).density() == 1e16 / (0.01 * 0.01 * 0.01));
  }
}

TEST_SUITE("cube_potential") {
  TEST_CASE("approximation and oracle are negative up to n^2 = 27") {
    const double m = test::ytterbium().mass_kg;
    for (int n2 = 1; n2 <= 27; ++n2) CHECK(cube::gk_approx_shell(n2, m, 0.01) < 0.0);
    for (const auto& row : test::load_fixture("potential_oracle.json")["rows"]) {
      if (row["n2"] == 0) continue;
      const ModeIndex mode{row["nx"].get<int>(), row["ny"].get<int>(), row["nz"].get<int>()};
      CHECK(cube::gk_oracle_1d(mode, m, 0.01, 1e-10) < 0.0);
    }
  }

  TEST_CASE("|gk_approx| strictly decreases with n^2") {
    const double m = test::ytterbium().mass_kg;
    for (int n2 = 1; n2 < 100; ++n2) {
      CHECK(std::abs(cube::gk_approx_shell(n2 + 1, m, 0.01)) < std::abs(cube::gk_approx_shell(n2, m, 0.01)));
    }
  }

  TEST_CASE("parity and permutation symmetry") {
    const double m = test::ytterbium().mass_kg;
    for (const ModeIndex base : {ModeIndex{1, 0, 0}, ModeIndex{1, 1, 0}, ModeIndex{2, 1, 0}, ModeIndex{3, 2, 1}}) {
      const double ref_approx = cube::gk_approx(base, m, 0.01);
      const double ref_oracle = cube::gk_oracle_1d(base, m, 0.01, 1e-10);
      for (const auto& mode : orbit(base)) {
        CHECK(cube::gk_approx(mode, m, 0.01) == ref_approx);
        CHECK(cube::gk_oracle_1d(mode, m, 0.01, 1e-10) == doctest::Approx(ref_oracle).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("closed-form coefficient") {
    const double expected =
        std::numbers::pi / 2 * (12 / std::numbers::pi * std::asinh(1 / std::numbers::sqrt2) - 1);
    CHECK(test::rel_diff(cube::v0_coefficient(), expected) < 1e-12);
  }

  TEST_CASE("coupling magnitudes stay below the zero mode") {
    const auto c = spectrum::build_couplings(test::yb_gas(1e16));
    CHECK(c.g_g0() < 0.0);
    for (int n2 = 1; n2 <= 100; ++n2) {
      CHECK(c.g_gk(n2) < 0.0);
      CHECK(std::abs(c.g_gk(n2)) < std::abs(c.g_g0()));
    }
  }

  // The axis-mode errors alternate in sign and magnitude (fixture), so the
  // expected monotone improvement does not hold.
  TEST_CASE("oracle agreement improves along n^2 = 1, 4, 9, 16, 25" * doctest::should_fail()) {
    const double m = test::ytterbium().mass_kg;
    double previous = INFINITY;
    for (const auto& mode : kAxisModes) {
      const double exact = cube::gk_oracle_1d(mode, m, 0.01, 1e-10);
      const double err = std::abs(cube::gk_approx(mode, m, 0.01) - exact) / std::abs(exact);
      CHECK(err < previous);
      previous = err;
    }
  }
}

TEST_SUITE("spectrum") {
  TEST_CASE("regime classification") {
    const auto free = spectrum::build_couplings(test::yb_gas(1e16, 0.01, 0.0));
    CHECK(free.regime() == spectrum::Regime::GravityDominated);
    const auto em = spectrum::build_couplings(test::yb_gas(1e16));
    CHECK(em.regime() == spectrum::Regime::EMDominated);
    CHECK_THROWS_AS(free.with_g_em(-free.g_g0()), Error);
  }

  TEST_CASE("chemical potential invariants") {
    for (double g : {0.0, 1e-57, 2.68e-51}) {
      const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, g));
      const double base = c.density() * (c.g_em() + c.g_g0());
      CHECK(spectrum::chemical_potential(c, GravityTheory::Classical).mu == base);
      const double mult = c.regime() == spectrum::Regime::GravityDominated ? 3.0 : 1.0;
      CHECK(spectrum::chemical_potential(c, GravityTheory::Quantum).mu == doctest::Approx(mult * base));
    }
  }

  TEST_CASE("energy increases with |k| over the lowest shells") {
    for (double g : {0.0, 1e-57, 2.68e-51}) {
      for (double n : {1e14, 1e16}) {
        const auto c = spectrum::build_couplings(test::yb_gas(n, 0.01, g));
        for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
          CHECK(spectrum::shell_energy(c, theory, 1) < spectrum::shell_energy(c, theory, 2));
          CHECK(spectrum::shell_energy(c, theory, 2) < spectrum::shell_energy(c, theory, 3));
        }
      }
    }
  }

  TEST_CASE("theory reduction to the textbook form") {
    const double hbar = units::kConstants.hbar;
    for (double g : {1e-55, 1e-53, 2.68e-51}) {
      const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, g));
      const auto q = c.with_gravity_scaled(0.0, 0.0);
      const auto cl = c.with_gravity_scaled(0.0, 1.0);
      for (int n2 = 1; n2 <= 50; ++n2) {
        const double k = 2 * std::numbers::pi * std::sqrt(static_cast<double>(n2)) / 0.01;
        const double m = c.mass();
        const double textbook = hbar * k * std::sqrt(hbar * hbar * k * k / (4.0 * m * m) + c.density() * g / m);
        CHECK(spectrum::shell_energy(q, GravityTheory::Quantum, n2) == textbook);
        CHECK(spectrum::shell_energy(cl, GravityTheory::Classical, n2) == textbook);
      }
    }
  }

  TEST_CASE("gravity-dominated radicand stays non-negative") {
    for (double n : {1e14, 1e15, 1e16}) {
      const auto c = spectrum::build_couplings(test::yb_gas(n, 0.01, 0.0));
      REQUIRE(c.regime() == spectrum::Regime::GravityDominated);
      for (int n2 = 1; n2 <= 100; ++n2) CHECK(spectrum::shell_radicand(c, GravityTheory::Quantum, n2) >= 0.0);
    }
  }

  TEST_CASE("isotropy") {
    const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, 0.0));
    for (const ModeIndex base : {ModeIndex{1, 0, 0}, ModeIndex{1, 1, 0}, ModeIndex{2, 1, 0}, ModeIndex{3, 0, 0}}) {
      for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
        const double ref = spectrum::dispersion(c, theory, base).epsilon;
        for (const auto& mode : orbit(base)) CHECK(spectrum::dispersion(c, theory, mode).epsilon == ref);
      }
    }
  }

  TEST_CASE("u^2 - v^2 = 1 across random stable modes") {
    std::mt19937_64 rng(20261015);
    std::uniform_int_distribution<int> comp(-6, 6);
    int checked = 0;
    while (checked < 100) {
      const double n = log_uniform(rng, 1e13, 1e17);
      const double g = rng() % 4 == 0 ? 0.0 : log_uniform(rng, 1e-58, 1e-50);
      const ModeIndex mode{comp(rng), comp(rng), comp(rng)};
      if (mode.is_zero()) continue;
      const auto theory = rng() % 2 ? GravityTheory::Quantum : GravityTheory::Classical;
      const auto c = spectrum::build_couplings(test::yb_gas(n, 0.01, g));
      if (spectrum::shell_radicand(c, theory, mode.n2()) <= 0.0) continue;
      const auto b = spectrum::bogolyubov_coefficients(c, theory, mode);
      CHECK(std::abs(b.u * b.u - b.v * b.v - 1.0) < 1e-10);
      CHECK(b.u >= 1.0);
      CHECK(b.v >= 0.0);
      ++checked;
    }
  }

  TEST_CASE("dispersion points are finite and non-negative") {
    const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, 0.0));
    for (int n2 = 1; n2 <= 200; ++n2) {
      for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
        const double e = spectrum::shell_energy(c, theory, n2);
        CHECK(std::isfinite(e));
        CHECK(e >= 0.0);
      }
    }
  }
}

TEST_SUITE("thermo") {
  TEST_CASE("shell table against enumeration and the three-squares form") {
    for (std::int64_t s = 0; s <= 150; ++s) {
      std::int64_t count = 0;
      for (int x = -13; x <= 13; ++x)
        for (int y = -13; y <= 13; ++y)
          for (int z = -13; z <= 13; ++z) count += (x * x + y * y + z * z == s);
      CHECK(thermo::shell_multiplicity(s) == count);
      std::int64_t r = s;
      while (r > 0 && r % 4 == 0) r /= 4;
      if (s > 0) CHECK((count == 0) == (r % 8 == 7));
    }
  }

  TEST_CASE("c_V is non-negative and vanishes as T -> 0") {
    for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
      const auto p = test::yb_gas(1e16, 0.01, 0.0);
      double previous = INFINITY;
      for (double t : {1e-14, 5e-15, 2.5e-15}) {
        const double cv = thermo::heat_capacity(p, theory, t).c_v_over_kB;
        CHECK(cv >= 0.0);
        CHECK(cv < previous);
        previous = cv;
      }
    }
  }

  TEST_CASE("shell sum equals direct enumeration") {
    const auto c = spectrum::build_couplings(test::yb_gas(1e15, 0.01, 1e-57));
    for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
      const auto shell = thermo::heat_capacity(c, theory, 3e-15, {.fixed_cutoff = 100});
      double direct = 0.0;
      for (int x = -10; x <= 10; ++x)
        for (int y = -10; y <= 10; ++y)
          for (int z = -10; z <= 10; ++z) {
            const ModeIndex m{x, y, z};
            if (!m.is_zero() && m.n2() <= 100) {
              direct += thermo::mode_term(spectrum::dispersion(c, theory, m).epsilon, 3e-15);
            }
          }
      CHECK(test::rel_diff(shell.c_v_over_kB, direct) < 1e-10);
    }
  }

  TEST_CASE("mode term crossover is continuous") {
    const double x = 1e-4;
    const double series = 1.0 - x * x / 12.0;
    const double exact = x * x * std::exp(-x) / (std::expm1(-x) * std::expm1(-x));
    CHECK(std::abs(series - exact) < 1e-12);
    CHECK(std::abs(thermo::mode_term_x(std::nextafter(x, 0.0)) - thermo::mode_term_x(x)) < 1e-12);
  }

  TEST_CASE("c_V depends on the mode energies only") {
    // Classical energies ignore g_g0, so scaling it leaves c_V untouched.
    const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, 1e-57));
    const auto a = thermo::heat_capacity(c, GravityTheory::Classical, 1e-14);
    const auto b = thermo::heat_capacity(c.with_gravity_scaled(0.5, 0.5), GravityTheory::Classical, 1e-14);
    CHECK(a.c_v_over_kB == b.c_v_over_kB);
    // Quantum with gravity off reproduces classical energies bitwise.
    const auto free = spectrum::build_couplings(test::yb_gas(1e16)).with_gravity_scaled(0.0, 0.0);
    CHECK(thermo::heat_capacity(free, GravityTheory::Quantum, 3e-11).c_v_over_kB ==
          thermo::heat_capacity(free, GravityTheory::Classical, 3e-11).c_v_over_kB);
  }

  TEST_CASE("quantum minus classical grows with N") {
    double previous = 0.0;
    for (double n : {1e14, 1e15, 1e16}) {
      const auto p = test::yb_gas(n, 0.01, 0.0);
      const double d = std::abs(thermo::heat_capacity(p, GravityTheory::Quantum, 1e-14).c_v_over_kB -
                                thermo::heat_capacity(p, GravityTheory::Classical, 1e-14).c_v_over_kB);
      CHECK(d > previous);
      previous = d;
    }
  }

  TEST_CASE("finite-difference dE/dT matches c_V") {
    const thermo::ThermoOptions tight{.rel_tol = 1e-14};
    for (double g : {0.0, 1e-57}) {
      const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, g));
      for (auto theory : {GravityTheory::Classical, GravityTheory::Quantum}) {
        for (double t : {5e-15, 1e-14, 3e-14}) {
          const double h = 5e-3 * t;
          const double up = thermo::heat_capacity(c, theory, t + h, tight).internal_energy_thermal;
          const double down = thermo::heat_capacity(c, theory, t - h, tight).internal_energy_thermal;
          const double cv = thermo::heat_capacity(c, theory, t, tight).c_v;
          CHECK(test::rel_diff((up - down) / (2 * h), cv) < 1e-4);
        }
      }
    }
  }

  TEST_CASE("converged results carry a quiet tail") {
    const auto r = thermo::heat_capacity(test::yb_gas(1e16, 0.01, 0.0), GravityTheory::Quantum, 1e-14);
    CHECK(r.converged);
    const auto c = spectrum::build_couplings(test::yb_gas(1e16, 0.01, 0.0));
    const double last = static_cast<double>(thermo::shell_multiplicity(r.shells_used)) *
                        thermo::mode_term(spectrum::shell_energy(c, GravityTheory::Quantum, r.shells_used), 1e-14);
    CHECK(last < 1e-9 * r.c_v_over_kB);
  }
}

TEST_SUITE("experiment") {
  TEST_CASE("deviations vanish without gravity") {
    const auto c = spectrum::build_couplings(test::yb_gas(1e16)).with_gravity_scaled(0.0, 0.0);
    CHECK(experiment::energy_deviation(c, {1, 0, 0}).rel_deviation_percent == 0.0);
    CHECK(experiment::heatcap_deviation(c, 3e-11).rel_deviation_percent == 0.0);
  }

  TEST_CASE("NL threshold scalings") {
    const auto& yb = test::ytterbium();
    const double base = experiment::nl_threshold(yb, 1, 0.1).nl;
    CHECK(experiment::nl_threshold(yb, 3, 0.1).nl == doctest::Approx(3 * base).epsilon(1e-14));
    CHECK(experiment::nl_threshold(yb, 1, 0.5).nl == doctest::Approx(5 * base).epsilon(1e-14));
    const auto light = units::make_species("light", yb.mass_u() / 2, 5.55, 0.0);
    CHECK(experiment::nl_threshold(light, 1, 0.1).nl == doctest::Approx(8 * base).epsilon(1e-12));
  }

  TEST_CASE("threshold self-consistency within a factor of 3") {
    for (double dev : {0.05, 0.1, 0.3}) {
      const double nl = experiment::nl_threshold(test::ytterbium(), 1, dev).nl;
      const double got = experiment::energy_deviation(test::yb_gas(nl / 0.01, 0.01, 0.0), {1, 0, 0})
                             .rel_deviation_percent;
      CHECK(got > dev / 3);
      CHECK(got < dev * 3);
    }
  }

  TEST_CASE("half-life scales as 1 / (rate n^2)") {
    const auto base = units::make_species("s", 174.0, 5.55, 1e-41);
    const auto fast = units::make_species("f", 174.0, 5.55, 2e-41);
    const double t0 = *experiment::validity_report(units::GasParameters(base, 1e16, 0.01)).three_body_half_life;
    const double t1 = *experiment::validity_report(units::GasParameters(fast, 1e16, 0.01)).three_body_half_life;
    const double t2 = *experiment::validity_report(units::GasParameters(base, 2e16, 0.01)).three_body_half_life;
    CHECK(t1 == doctest::Approx(t0 / 2).epsilon(1e-14));
    CHECK(t2 == doctest::Approx(t0 / 4).epsilon(1e-14));
  }

  TEST_CASE("validity entries are finite and non-negative") {
    for (double n : {1.0, 1e10, 1e16, 1e22}) {
      const auto v = experiment::validity_report(test::yb_gas(n));
      for (double x : {v.diluteness, v.relativistic_radius, v.schwarzschild_ratio, v.estimated_velocity,
                       *v.three_body_half_life}) {
        CHECK(std::isfinite(x));
        CHECK(x >= 0.0);
      }
    }
  }

  TEST_CASE("scan deviation column is monotone in N") {
    const auto rows = experiment::scan(test::ytterbium(), 0.0, {{1e14, 1e15, 1e16}, {0.01}, {1e-14}});
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].heatcap->rel_deviation_percent > rows[i - 1].heatcap->rel_deviation_percent);
      CHECK(rows[i].energy->rel_deviation_percent > rows[i - 1].energy->rel_deviation_percent);
    }
  }
}

TEST_SUITE("cli") {
  TEST_CASE("random configs round-trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
      cli::RunConfig c;
      c.command = "scan";
      c.N_atoms = log_uniform(rng, 1, 1e20);
      c.L_m = log_uniform(rng, 1e-4, 1);
      if (rng() % 2) c.T_K = log_uniform(rng, 1e-16, 1e-9);
      if (rng() % 2) c.g_em_override_J_m3 = log_uniform(rng, 1e-60, 1e-50);
      if (rng() % 3 == 0) c.species.mass_u = log_uniform(rng, 1, 300);
      c.rel_tol = log_uniform(rng, 1e-14, 1e-3);
      c.theory = static_cast<cli::TheorySelector>(rng() % 3);
      c.scan_T_K = {log_uniform(rng, 1e-16, 1e-9), log_uniform(rng, 1e-16, 1e-9)};
      CHECK(cli::config_from_json(nlohmann::json::parse(cli::to_json(c).dump())) == c);
    }
  }

  TEST_CASE("identical invocations give identical bytes") {
    std::ostringstream a, b, e;
    const std::vector<std::string> args{"spectrum", "--max-n2", "30", "--g-em-J-m3", "0"};
    CHECK(cli::run(args, a, e) == 0);
    CHECK(cli::run(args, b, e) == 0);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# tool: ", 0) == 0);
  }
}
