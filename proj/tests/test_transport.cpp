#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "ccbox/constants.hpp"
#include "ccbox/error.hpp"
#include "ccbox/formats.hpp"
#include "ccbox/kinematics.hpp"
#include "ccbox/sampling.hpp"
#include "ccbox/transport.hpp"

using namespace ccbox;

namespace {

// Composite Simpson rule on [a, b] with n (even) panels.
double simpson(const std::function<double(double)> &f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// CDF of E^index on [lo, hi] by quadrature in ln E, tabulated on a grid.
struct NumericCdf {
  std::vector<double> x;
  std::vector<double> cdf;

  NumericCdf(double index, double lo, double hi, int nodes = 4000) {
    const auto f = [index](double l) { return std::exp((index + 1.0) * l); };  // E^index dE = E^(index+1) d(ln E)
    const double a = std::log(lo);
    const double b = std::log(hi);
    x.resize(nodes + 1);
    cdf.resize(nodes + 1);
    for (int i = 0; i <= nodes; ++i) {
      const double l = a + (b - a) * i / nodes;
      x[i] = std::exp(l);
      cdf[i] = i == 0 ? 0.0 : cdf[i - 1] + simpson(f, a + (b - a) * (i - 1) / nodes, l, 8);
    }
    for (double &c : cdf) c /= cdf.back();
  }

  double operator()(double e) const {
    const auto it = std::upper_bound(x.begin(), x.end(), e);
    if (it == x.begin()) return 0.0;
    if (it == x.end()) return 1.0;
    const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
    const double t = std::log(e / x[k]) / std::log(x[k + 1] / x[k]);
    return cdf[k] + t * (cdf[k + 1] - cdf[k]);
  }
};

double ks_distance(std::vector<double> samples, const std::function<double(double)> &cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max({d, std::abs(c - i / n), std::abs((i + 1) / n - c)});
  }
  return d;
}

// Asymptotic Kolmogorov survival function.
double ks_pvalue(double d, std::size_t n) {
  const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12 + 0.11 / std::sqrt(static_cast<double>(n))) * d;
  double p = 0.0;
  for (int k = 1; k < 200; ++k) p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

// Regularized upper incomplete gamma Q(a, x) by series / continued fraction.
double gamma_q(double a, double x) {
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Klein-Nishina dsigma/dOmega up to a constant, as a function of cos theta.
double kn_pdf_cos(double e_kev, double c) {
  const double k = e_kev / kElectronMassKeV;
  const double r = 1.0 / (1.0 + k * (1.0 - c));
  return r * r * (r + 1.0 / r - (1.0 - c * c));
}

const MaterialLibrary &materials() {
  static const MaterialLibrary lib = MaterialLibrary::load(MaterialLibrary::default_dir());
  return lib;
}

}  // namespace

TEST_CASE("power-law sampler") {
  Rng rng(101);
  SUBCASE("mean for index -2 matches the analytic value") {
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_power_law(-2.0, 30.0, 3000.0, rng);
    const double analytic = std::log(100.0) / (1.0 / 30.0 - 1.0 / 3000.0);
    CHECK(analytic == doctest::Approx(139.56).epsilon(1e-3));
    CHECK(sum / n == doctest::Approx(analytic).epsilon(0.01));
  }
  SUBCASE("KS distance against the numeric CDF, index -2.88") {
    std::vector<double> s(1000000);
    for (double &e : s) e = sample_power_law(-2.88, 30.0, 3000.0, rng);
    const NumericCdf cdf(-2.88, 30.0, 3000.0);
    CHECK(ks_distance(s, std::cref(cdf)) < 0.005);
  }
  SUBCASE("index -1 uses the logarithmic form") {
    std::vector<double> s(200000);
    for (double &e : s) e = sample_power_law(-1.0, 30.0, 3000.0, rng);
    const NumericCdf cdf(-1.0, 30.0, 3000.0);
    CHECK(ks_distance(s, std::cref(cdf)) < 0.005);
  }
  SUBCASE("degenerate band stays inside") {
    for (double idx : {-2.88, -1.35, -1.0, 0.0, 1.5}) {
      for (int i = 0; i < 1000; ++i) {
        const double lo = 100.0 - 1e-9;
        const double e = sample_power_law(idx, lo, 100.0, rng);
        CHECK(e >= lo);
        CHECK(e <= 100.0);
      }
    }
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(sample_power_law(NAN, 30.0, 3000.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_power_law(-2.0, 3000.0, 30.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_power_law(-2.0, 0.0, 30.0, rng), ParameterError);
  }
}

TEST_CASE("field-of-view cap sampler") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(sample_source_direction(0.0, rng) == Vec3{0.0, 0.0, 1.0});

  const int n = 1000000;
  const double cmin = std::cos(30.0 * kDegToRad);
  double polar_sum = 0.0;
  bool inside = true;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = sample_source_direction(30.0, rng);
    inside = inside && d.z >= cmin - 1e-15 && std::abs(norm(d) - 1.0) < 1e-12;
    polar_sum += std::acos(std::clamp(d.z, -1.0, 1.0));
  }
  CHECK(inside);
  // Mean polar angle over the cap measure sin(theta) dtheta.
  const double a = 30.0 * kDegToRad;
  const double num = simpson([](double t) { return t * std::sin(t); }, 0.0, a, 2000);
  const double den = simpson([](double t) { return std::sin(t); }, 0.0, a, 2000);
  CHECK(std::abs(polar_sum / n - num / den) * kRadToDeg < 0.1);
}

TEST_CASE("hemisphere sampler is uniform in solid angle") {
  Rng rng(8);
  const int n = 400000;
  double zu = 0.0, zl = 0.0, xu = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 u = sample_hemisphere(true, rng);
    const Vec3 l = sample_hemisphere(false, rng);
    REQUIRE(u.z >= 0.0);
    REQUIRE(l.z <= 0.0);
    zu += u.z;
    zl += l.z;
    xu += u.x;
  }
  // E[z] = 1/2 on a hemisphere, E[x] = 0.
  CHECK(zu / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(zl / n == doctest::Approx(-0.5).epsilon(0.01));
  CHECK(std::abs(xu / n) < 0.005);
}

TEST_CASE("Klein-Nishina sampler") {
  Rng rng(9);
  SUBCASE("Thomson limit is symmetric") {
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::cos(sample_klein_nishina(1.0, rng));
    CHECK(std::abs(sum / n) < 0.01);
  }
  SUBCASE("histogram at 511 keV matches the integrated pdf (chi-square)") {
    const int n = 1000000;
    const int bins = 50;
    std::vector<double> counts(bins, 0.0);
    for (int i = 0; i < n; ++i) {
      const double theta = sample_klein_nishina(511.0, rng);
      REQUIRE(theta > 0.0);
      REQUIRE(theta <= kPi);
      const int b = std::min(bins - 1, static_cast<int>((1.0 - std::cos(theta)) / 2.0 * bins));
      counts[b] += 1.0;
    }
    const auto pdf = [](double c) { return kn_pdf_cos(511.0, c); };
    const double total = simpson(pdf, -1.0, 1.0, 20000);
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double c_hi = 1.0 - 2.0 * b / bins;
      const double c_lo = 1.0 - 2.0 * (b + 1) / bins;
      const double expected = n * simpson(pdf, c_lo, c_hi, 200) / total;
      chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
    }
    const double p = gamma_q(0.5 * (bins - 1), 0.5 * chi2);
    MESSAGE("KN chi2 = " << chi2 << ", p = " << p);
    CHECK(p > 0.01);
  }
  SUBCASE("domain at many energies") {
    for (double e : {10.0, 60.0, 511.0, 3000.0, 1e5}) {
      for (int i = 0; i < 20000; ++i) {
        const double t = sample_klein_nishina(e, rng);
        CHECK(t > 0.0);
        CHECK(t <= kPi);
      }
    }
  }
}

TEST_CASE("Compton outgoing energy") {
  CHECK(compton_outgoing_energy(662.0, 0.0) == 662.0);
  CHECK(compton_outgoing_energy(kElectronMassKeV, kPi) == doctest::Approx(kElectronMassKeV / 3.0).epsilon(1e-12));
  CHECK(compton_outgoing_energy(511.0, kPi) == doctest::Approx(170.333).epsilon(1e-5));
}

TEST_CASE("a photon that misses everything escapes with its energy") {
  const DetectorGeometry g = build_default_geometry();
  Rng rng(1);
  const Photon p{{500.0, 500.0, 100.0}, {0.0, 0.0, 1.0}, 662.0};
  const PhotonHistory h = transport_photon(p, g, materials(), rng);
  CHECK(h.interactions.empty());
  CHECK(h.escaped_energy_kev == 662.0);
}

TEST_CASE("property: every history conserves energy") {
  const DetectorGeometry g = build_default_geometry();
  const GenerationDisk disk = GenerationDisk::enclosing(g);
  Rng rng(12345);
  for (SourceKind kind : {SourceKind::grb_point, SourceKind::cxb, SourceKind::albedo}) {
    SourceSpec s;
    s.kind = kind;
    s.photon_index = -1.3;
    s.direction = normalized({0.2, -0.1, 1.0});
    int violations = 0;
    int interacted = 0;
    for (int i = 0; i < 20000; ++i) {
      const Photon p = generate_primary(s, disk, rng);
      const PhotonHistory h = transport_photon(p, g, materials(), rng);
      const double sum = h.deposited_kev() + h.escaped_energy_kev;
      if (std::abs(sum - h.initial_energy_kev) > 1e-6 * h.initial_energy_kev) ++violations;
      for (const auto &it : h.interactions) {
        if (!(it.deposit_kev > 0.0) || !g.volume(it.volume).box.contains_closed(it.position, 1e-6) ||
            g.volume(it.volume).segment != it.segment) {
          ++violations;
        }
      }
      interacted += h.interactions.empty() ? 0 : 1;
    }
    CHECK(violations == 0);
    CHECK(interacted > 1000);
  }
}

TEST_CASE("primary generation") {
  const DetectorGeometry g = build_default_geometry();
  const GenerationDisk disk = GenerationDisk::enclosing(g);
  CHECK(disk.radius_mm == doctest::Approx(1.2 * 0.5 * norm(g.bounding_box().size())));
  Rng rng(3);
  SourceSpec s;
  s.direction = normalized({0.3, 0.1, 1.0});
  for (int i = 0; i < 2000; ++i) {
    const Photon p = generate_primary(s, disk, rng);
    CHECK(norm(p.direction + s.direction) < 1e-12);
    // Start point lies on the disk plane beyond the detector.
    CHECK(dot(p.position - disk.center, s.direction) == doctest::Approx(disk.radius_mm));
    CHECK(norm(p.position - disk.center - disk.radius_mm * s.direction) <= disk.radius_mm + 1e-9);
    CHECK(p.energy_kev >= s.e_min_kev);
    CHECK(p.energy_kev <= s.e_max_kev);
  }
  s.kind = SourceKind::cxb;
  for (int i = 0; i < 2000; ++i) CHECK(generate_primary(s, disk, rng).direction.z <= 0.0);
  s.kind = SourceKind::albedo;
  for (int i = 0; i < 2000; ++i) CHECK(generate_primary(s, disk, rng).direction.z >= 0.0);
}

TEST_CASE("first-interaction depth of a 662 keV pencil beam is exponential") {
  const DetectorGeometry g = build_default_geometry();
  const double mu = lookup_attenuation(materials().gagg, 662.0).total();
  const double stack = g.params().rear_layers * g.params().rear_layer_thickness_mm;
  const double top = -g.params().front_thickness_mm - g.params().front_to_rear_gap_mm;
  Rng rng(77);
  std::vector<double> depth;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Photon p{{10.3, -7.7, top + 1.0}, {0.0, 0.0, -1.0}, 662.0};
    const PhotonHistory h = transport_photon(p, g, materials(), rng);
    if (!h.interactions.empty() && h.interactions.front().segment == Segment::rear) {
      depth.push_back(top - h.interactions.front().position.z);
    }
  }
  // Conditional on interacting inside the stack.
  const double norm_c = 1.0 - std::exp(-mu * stack);
  const double d = ks_distance(depth, [&](double x) { return (1.0 - std::exp(-mu * x)) / norm_c; });
  const double p = ks_pvalue(d, depth.size());
  MESSAGE("depth KS D = " << d << ", p = " << p << ", n = " << depth.size());
  CHECK(p > 0.01);
  CHECK(static_cast<double>(depth.size()) / n == doctest::Approx(norm_c).epsilon(0.01));
}

TEST_CASE("detector response") {
  const DetectorGeometry g = build_default_geometry();
  const auto front = *g.locate({10.4, 7.2, -1.3});
  const auto rear = *g.locate({-13.7, 21.1, -52.0});

  SUBCASE("zero resolution leaves deposits unchanged and quantizes positions") {
    PhotonHistory h;
    h.interactions = {{{10.4, 7.2, -1.3}, 123.25, Segment::front, Process::compton, static_cast<std::uint16_t>(front)},
                      {{-13.7, 21.1, -52.0}, 538.75, Segment::rear, Process::photoelectric,
                       static_cast<std::uint16_t>(rear)}};
    Rng rng(1);
    const auto out = apply_resolution(h, ResolutionModel{0.0}, g, rng);
    REQUIRE(out.size() == 2);
    CHECK(out[0].deposit_kev == 123.25);
    CHECK(out[1].deposit_kev == 538.75);
    CHECK(out[0].position == Vec3{10.5, 7.5, -2.5});
    CHECK(out[1].position == Vec3{-13.0, 21.0, -45.0});
  }
  SUBCASE("FWHM at 662 keV") {
    const ResolutionModel model{0.08};
    CHECK(model.sigma_kev(662.0) * kFwhmPerSigma == doctest::Approx(52.96));
    PhotonHistory h;
    h.interactions.assign(100000, {{-13.7, 21.1, -52.0}, 662.0, Segment::rear, Process::photoelectric,
                                   static_cast<std::uint16_t>(rear)});
    Rng rng(2);
    const auto out = apply_resolution(h, model, g, rng);
    double mean = 0.0;
    for (const auto &it : out) mean += it.deposit_kev;
    mean /= out.size();
    double var = 0.0;
    for (const auto &it : out) var += (it.deposit_kev - mean) * (it.deposit_kev - mean);
    const double fwhm = kFwhmPerSigma * std::sqrt(var / (out.size() - 1));
    CHECK(fwhm == doctest::Approx(53.0).epsilon(0.02));
    CHECK(mean == doctest::Approx(662.0).epsilon(0.001));
  }
  SUBCASE("smeared deposits are floored at zero") {
    PhotonHistory h;
    h.interactions.assign(10000, {{-13.7, 21.1, -52.0}, 0.5, Segment::rear, Process::photoelectric,
                                  static_cast<std::uint16_t>(rear)});
    Rng rng(3);
    const auto out = apply_resolution(h, ResolutionModel{3.0}, g, rng);
    CHECK(std::all_of(out.begin(), out.end(), [](const Interaction &it) { return it.deposit_kev >= 0.0; }));
    CHECK(std::any_of(out.begin(), out.end(), [](const Interaction &it) { return it.deposit_kev == 0.0; }));
  }
}

TEST_CASE("simulate_run") {
  const DetectorGeometry g = build_default_geometry();
  SourceSpec grb;
  grb.direction = normalized({0.1, 0.2, 1.0});
  grb.photon_index = -2.0;

  SUBCASE("configuration errors") {
    RunConfig rc;
    CHECK_THROWS_AS(simulate_run(rc, g, materials()), ParameterError);
    rc.sources = {grb, grb};
    CHECK_THROWS_AS(simulate_run(rc, g, materials()), ParameterError);
    SourceSpec outside = grb;
    outside.direction = normalized({1.0, 0.0, 0.5});
    rc.sources = {outside};
    CHECK_THROWS_AS(simulate_run(rc, g, materials()), ParameterError);
  }
  SUBCASE("zero flux gives no events") {
    RunConfig rc;
    SourceSpec s = grb;
    s.flux = 0.0;
    SourceSpec cxb = s;
    cxb.kind = SourceKind::cxb;
    rc.sources = {s, cxb};
    const RunRecord r = simulate_run(rc, g, materials());
    CHECK(r.events.empty());
    CHECK(r.generated_photons[0] == 0);
  }
  SUBCASE("photon count is Poisson(flux * area * duration)") {
    RunConfig rc;
    SourceSpec s = grb;
    s.duration_s = 10.0;
    rc.sources = {s};
    rc.generation_radius_mm = std::sqrt(400.0 * 100.0 / kPi);
    double sum = 0.0;
    const int runs = 200;
    for (int i = 0; i < runs; ++i) {
      rc.seed = Rng::derive_seed(99, i);
      const RunRecord r = simulate_run(rc, g, materials());
      CHECK(r.generation_area_cm2 == doctest::Approx(400.0));
      sum += static_cast<double>(r.generated_photons[0]);
    }
    const double mean = sum / runs;
    CHECK(std::abs(mean - 4000.0) < 3.0 * std::sqrt(4000.0 / runs));
  }
  SUBCASE("same seed gives identical records") {
    RunConfig rc;
    SourceSpec s = grb;
    s.duration_s = 5.0;
    SourceSpec alb = s;
    alb.kind = SourceKind::albedo;
    alb.photon_index = -1.35;
    rc.sources = {s, alb};
    rc.seed = 4242;
    const RunRecord a = simulate_run(rc, g, materials());
    const RunRecord b = simulate_run(rc, g, materials());
    REQUIRE(!a.events.empty());
    CHECK(a.events == b.events);
    CHECK(a.event_origin == b.event_origin);
    const auto bounds = NormalizationBounds::for_geometry(g);
    bool same_bytes = true;
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      same_bytes = same_bytes && encode_event(a.events[i], bounds) == encode_event(b.events[i], bounds);
    }
    CHECK(same_bytes);
    rc.seed = 4243;
    CHECK_FALSE(simulate_run(rc, g, materials()).events == a.events);
  }
  SUBCASE("events respect the trigger and every origin appears") {
    RunConfig rc;
    SourceSpec s = grb;
    s.duration_s = 20.0;
    SourceSpec cxb = s;
    cxb.kind = SourceKind::cxb;
    cxb.photon_index = -2.88;
    SourceSpec alb = s;
    alb.kind = SourceKind::albedo;
    alb.photon_index = -1.35;
    rc.sources = {s, cxb, alb};
    rc.seed = 5;
    const RunRecord r = simulate_run(rc, g, materials());
    REQUIRE(r.events.size() == r.event_origin.size());
    std::array<int, kSourceKindCount> seen{};
    for (std::size_t i = 0; i < r.events.size(); ++i) {
      CHECK(r.events[i].total_energy() >= rc.trigger_kev);
      ++seen[static_cast<std::size_t>(r.event_origin[i])];
    }
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);
    CHECK(seen[2] > 0);
    CHECK(r.background);
  }
}
