#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rfidloc/propagation.hpp"
#include "rfidloc/scenario.hpp"

using namespace rfidloc;

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

constexpr double kLambda = 0.3463006330137461;  // 865.7 MHz

struct GeometrySampler {
  std::mt19937_64 engine;
  explicit GeometrySampler(std::uint64_t seed) : engine(seed) {}

  ReaderAntenna antenna() {
    std::uniform_real_distribution<double> pos(0.0, 8.0);
    std::uniform_real_distribution<double> height(1.5, 3.0);
    std::uniform_real_distribution<double> elev(kPi / 4, kPi / 2);
    std::uniform_real_distribution<double> azim(-kPi, kPi);
    return {1, {pos(engine), pos(engine), height(engine)}, elev(engine), azim(engine)};
  }

  Position3D tag_near(const ReaderAntenna& a) {
    std::uniform_real_distribution<double> pos(0.0, 8.0);
    std::uniform_real_distribution<double> z(0.5, 1.5);
    for (;;) {
      Position3D t{pos(engine), pos(engine), z(engine)};
      const double l = std::hypot(t.x - a.position.x, t.y - a.position.y);
      if (l > 0.05) return t;
    }
  }
};

}  // namespace

TEST_CASE("path loss follows the inverse-square free-space form") {
  CHECK(rel_err(path_loss_linear(1.0, kLambda), 7.59428414960612669e-4) < 1e-12);

  // doubling the distance divides the gain by exactly four
  std::mt19937_64 engine(11);
  std::uniform_real_distribution<double> dist(0.05, 40.0);
  for (int i = 0; i < 200; ++i) {
    const double d = dist(engine);
    CHECK(rel_err(path_loss_linear(2.0 * d, kLambda), path_loss_linear(d, kLambda) / 4.0) <
          1e-12);
  }

  // unit crossing point at d = lambda / (4 pi)
  CHECK(rel_err(path_loss_linear(kLambda / (4.0 * kPi), kLambda), 1.0) < 1e-12);

  // strictly decreasing
  double prev = path_loss_linear(0.01, kLambda);
  for (double d = 0.02; d < 20.0; d += 0.13) {
    const double cur = path_loss_linear(d, kLambda);
    CHECK(cur < prev);
    prev = cur;
  }

  CHECK_THROWS_AS(path_loss_linear(0.0, kLambda), std::domain_error);
  CHECK_THROWS_AS(path_loss_linear(-1.0, kLambda), std::domain_error);
  CHECK_THROWS_AS(path_loss_linear(1.0, 0.0), std::domain_error);
}

TEST_CASE("reflection coefficient links cross-section, wavelength and tag gain") {
  CHECK(reflection_coefficient_sq(0.0, kLambda, 1.0) == 0.0);
  CHECK(rel_err(reflection_coefficient_sq(0.005, kLambda, 1.0), 0.523930037237775130) < 1e-12);

  // algebraic inversion: sigma = lambda^2 G^2 / (4 pi) gives exactly 1
  const double sigma_unit = kLambda * kLambda * 1.21 * 1.21 / (4.0 * kPi);
  CHECK(rel_err(reflection_coefficient_sq(sigma_unit, kLambda, 1.21), 1.0) < 1e-12);

  CHECK_THROWS_AS(reflection_coefficient_sq(0.005, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(reflection_coefficient_sq(0.005, kLambda, 0.0), std::domain_error);
  CHECK_THROWS_AS(reflection_coefficient_sq(-0.1, kLambda, 1.0), std::domain_error);
}

TEST_CASE("polar patch gain matches hand-evaluated anchors") {
  CHECK(patch_gain_polar(0.0, 0.0) == 0.0);
  CHECK(patch_gain_polar(0.0, 1.3) == 0.0);

  CHECK(rel_err(patch_gain_polar(kPi / 4, 0.0), 2.51773739157957946) < 1e-12);
  CHECK(rel_err(patch_gain_polar(kPi / 4, kPi / 2), 0.496372094080234872) < 1e-12);

  // pole limit: tan * sin tends to pi/2, so the gain tends to 3.136 (pi/2)^2
  const double limit = 7.73776985045405716;
  CHECK(rel_err(patch_gain_polar(kPi / 2, 0.0), limit) < 1e-12);
  CHECK(rel_err(patch_gain_polar(kPi / 2 - 1e-6, 0.0), limit) < 1e-9);
  CHECK(rel_err(patch_gain_polar(-kPi / 2, 0.0), limit) < 1e-12);

  // non-negative everywhere sampled
  std::mt19937_64 engine(12);
  std::uniform_real_distribution<double> alpha(-kPi / 2, kPi / 2);
  std::uniform_real_distribution<double> phi(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    CHECK(patch_gain_polar(alpha(engine), phi(engine)) >= 0.0);
  }
}

TEST_CASE("Cartesian gain agrees with the polar form under translation") {
  // worked example: antenna at the origin 2 m up, quarter tilt, boresight +y,
  // tag three meters along the boresight one meter below
  const ReaderAntenna ant{1, {0.0, 0.0, 2.0}, kPi / 4, kPi / 2};
  const Position3D tag{0.0, 3.0, 1.0};
  const double g_cart = patch_gain_cartesian(ant, tag);
  const double alpha = kPi / 4 - std::asin(1.0 / std::sqrt(10.0));
  CHECK(rel_err(g_cart, patch_gain_polar(alpha, 0.0)) < 1e-9);
  CHECK(rel_err(g_cart, 0.76263636351876101) < 1e-12);

  // boresight null: alpha = 0 when the depression angle equals the tilt
  const Position3D null_tag{1.0, 0.0, 1.0};  // l = 1, H = 1, d = sqrt(2)
  CHECK(patch_gain_cartesian({1, {0.0, 0.0, 2.0}, kPi / 4, 0.0}, null_tag) ==
        Catch::Approx(0.0).margin(1e-25));

  // vertical axis is singular for the Cartesian form
  CHECK_THROWS_AS(patch_gain_cartesian(ant, {0.0, 0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(patch_gain_cartesian(ant, {0.0, 0.0, 2.0}), std::domain_error);
  // but the link-budget gain resolves it through the polar form
  CHECK(antenna_gain(ant, {0.0, 0.0, 1.0}) ==
        Catch::Approx(patch_gain_polar(kPi / 4 - kPi / 2, kPi / 2)));

  // property: polar and Cartesian routes agree on random non-singular pairs
  GeometrySampler sampler(13);
  for (int i = 0; i < 1000; ++i) {
    const ReaderAntenna a = sampler.antenna();
    const Position3D t = sampler.tag_near(a);
    const PatchGeometry g = patch_geometry(a, t);
    const double alpha_t = a.elevation - std::asin(g.drop / g.dist);
    const double phi_t = std::asin(std::clamp(g.sin_rel_az, -1.0, 1.0));
    const double polar = patch_gain_polar(alpha_t, phi_t);
    const double cart = patch_gain_cartesian(a, t);
    CHECK(std::abs(polar - cart) / std::max(polar, 1e-12) < 1e-9);
  }
}

TEST_CASE("forward link RSS") {
  RadioParams params;  // defaults: 1000 mW, rho_L 0.5, 0 dBi tag, |h|^2 = 1
  const ReaderAntenna ant{1, {0.0, 0.0, 2.0}, kPi / 4, kPi / 2};

  // boresight tag at d = 2 m, value pinned by an independent link-budget oracle
  const Position3D tag{0.0, std::sqrt(3.0), 1.0};
  CHECK(rel_err(forward_rss_dbm(params, ant, tag), -16.7136693545522759) < 1e-12);

  // an exact pattern null gives the no-signal sentinel: zero tilt with the
  // tag at antenna height makes the elevation factor exactly zero
  const ReaderAntenna flat{1, {0.0, 0.0, 2.0}, 0.0, 0.0};
  CHECK(antenna_gain(flat, {1.0, 0.0, 2.0}) == 0.0);
  CHECK(is_no_signal(forward_rss_dbm(params, flat, {1.0, 0.0, 2.0})));

  // doubling the transmit power raises the RSS by 10 log10(2) dB and is monotone
  RadioParams doubled = params;
  doubled.set_tx_power_mw(2000.0);
  const double shift = forward_rss_dbm(doubled, ant, tag) - forward_rss_dbm(params, ant, tag);
  CHECK(rel_err(shift, 10.0 * std::log10(2.0)) < 1e-9);
}

TEST_CASE("round-trip RSS: diagonal identity, symmetry, oracle anchor") {
  Scenario s = build_scenario(Placement::corner, kPi / 4, 1000.0, Mode::bistatic);
  const Position3D center{4.0, 4.0, 1.0};

  // independent oracle value at the room center (defaults, corner pair 1-2)
  CHECK(rel_err(bistatic_rss_dbm(s.radio, s.antennas[0], s.antennas[1], center),
                -69.7486622403928942) < 1e-12);
  CHECK(rel_err(forward_rss_dbm(s.radio, s.antennas[0], center), -17.8846310768362590) < 1e-12);

  GeometrySampler sampler(14);
  for (int i = 0; i < 300; ++i) {
    const ReaderAntenna a = sampler.antenna();
    ReaderAntenna b = sampler.antenna();
    b.id = 2;
    const Position3D t = sampler.tag_near(a);
    const double gb = antenna_gain(b, t);
    const double ga = antenna_gain(a, t);
    if (!(ga > 0.0) || !(gb > 0.0)) continue;
    // bistatic(i, i) is monostatic bit for bit
    CHECK(bistatic_rss_dbm(s.radio, a, a, t) == monostatic_rss_dbm(s.radio, a, t));
    // swapping tx and rx changes nothing under a shared channel gain
    CHECK(bistatic_rss_dbm(s.radio, a, b, t) == bistatic_rss_dbm(s.radio, b, a, t));
  }

  // dark geometry propagates the sentinel through either side of the pair
  const ReaderAntenna flat{9, {0.0, 0.0, 2.0}, 0.0, 0.0};
  CHECK(is_no_signal(bistatic_rss_dbm(s.radio, flat, s.antennas[1], {1.0, 0.0, 2.0})));
  CHECK(is_no_signal(bistatic_rss_dbm(s.radio, s.antennas[1], flat, {1.0, 0.0, 2.0})));

  // monostatic structure: constant term plus twice the per-antenna terms
  const ReaderAntenna& a1 = s.antennas[0];
  const double g = antenna_gain(a1, center);
  const double pl = path_loss_linear(distance(a1.position, center), s.radio.wavelength());
  const double h4 = s.radio.channel_gain_sq * s.radio.channel_gain_sq;
  const double constant =
      10.0 * std::log10(s.radio.modulation_efficiency * s.radio.power_transfer_efficiency *
                        s.radio.polarization_loss * s.radio.tx_power_mw() * s.radio.tag_gain *
                        s.radio.tag_gain * h4 * s.radio.reflection_coeff_sq);
  const double expected = constant + 2.0 * 10.0 * std::log10(g) + 2.0 * 10.0 * std::log10(pl);
  CHECK(rel_err(monostatic_rss_dbm(s.radio, a1, center), expected) < 1e-12);

  // halving the per-link channel gain drops the squared-channel round trip by
  // 2 * 10 log10(2)
  RadioParams half = s.radio;
  half.channel_gain_sq = 0.5;
  const double drop = monostatic_rss_dbm(s.radio, a1, center) - monostatic_rss_dbm(half, a1, center);
  CHECK(rel_err(drop, 20.0 * std::log10(2.0)) < 1e-9);
}

TEST_CASE("radio parameter validation") {
  RadioParams p;
  CHECK(rel_err(p.wavelength(), kLambda) < 1e-9);
  CHECK_NOTHROW(p.validate());

  p.tx_power_dbm = 36.0;  // above the EIRP cap
  CHECK_THROWS_AS(p.validate(), std::domain_error);
  p.allow_eirp_above_limit = true;
  CHECK_NOTHROW(p.validate());

  RadioParams bad;
  bad.modulation_efficiency = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = RadioParams{};
  bad.reflection_coeff_sq = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = RadioParams{};
  bad.tag_gain = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);

  RadioParams prod;
  prod.set_link_product(0.09);
  CHECK(rel_err(prod.link_product(), 0.09) < 1e-12);
  CHECK(rel_err(prod.power_transfer_efficiency, 0.3) < 1e-12);
  CHECK_THROWS_AS(prod.set_link_product(1.5), std::domain_error);
  CHECK_THROWS_AS(prod.set_link_product(0.0), std::domain_error);
}
