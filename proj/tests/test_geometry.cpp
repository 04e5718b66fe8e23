#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccbox/error.hpp"
#include "ccbox/geometry.hpp"
#include "ccbox/materials.hpp"
#include "ccbox/vec3.hpp"

using namespace ccbox;

TEST_CASE("vector helpers") {
  const Vec3 a{1.0, 2.0, 3.0};
  const Vec3 b{-2.0, 0.5, 1.0};
  CHECK(dot(a, b) == doctest::Approx(2.0));
  CHECK(dot(cross(a, b), a) == doctest::Approx(0.0));
  CHECK(norm(normalized(a)) == doctest::Approx(1.0));
  CHECK(angle_between({1, 0, 0}, {0, 1, 0}) == doctest::Approx(M_PI / 2));
  CHECK(angle_between({1, 0, 0}, {-1, 1e-12, 0}) == doctest::Approx(M_PI));

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec3 n = normalized({u(gen), u(gen), u(gen)});
    Vec3 e1, e2;
    orthonormal_basis(n, e1, e2);
    CHECK(std::abs(dot(n, e1)) < 1e-12);
    CHECK(std::abs(dot(n, e2)) < 1e-12);
    CHECK(std::abs(dot(e1, e2)) < 1e-12);
    const double ct = u(gen);
    const Vec3 r = rotate_direction(n, ct, 3.0 * u(gen));
    CHECK(norm(r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(r, n) == doctest::Approx(ct).epsilon(1e-12));
  }
}

TEST_CASE("default geometry dimensions") {
  const DetectorGeometry g = build_default_geometry();
  const auto &p = g.params();
  CHECK(p.front_pixel_pitch_mm == 1.0);
  CHECK(p.rear_pixel_pitch_mm == 2.0);
  CHECK(p.pinhole_side_mm == 5.5);
  CHECK(p.front_thickness_mm == 5.0);
  CHECK(p.rear_layers == 4);
  CHECK(p.rear_layer_thickness_mm == 20.0);
  // 2 x 2 modules of 50 mm: 100 cm^2 footprint.
  CHECK(g.rear_footprint_area_mm2() == doctest::Approx(1.0e4));

  const Box ph = g.pinhole();
  CHECK(ph.size().x == doctest::Approx(5.5));
  CHECK(ph.size().y == doctest::Approx(5.5));
  CHECK(g.pinhole_center().z == doctest::Approx(-2.5));
  CHECK_FALSE(g.locate(g.pinhole_center()).has_value());

  int rear = 0;
  double front_area = 0.0;
  for (const auto &v : g.volumes()) {
    if (v.segment == Segment::rear) {
      ++rear;
      CHECK(v.box.size().z == doctest::Approx(20.0));
      CHECK(v.material == MaterialId::gagg);
    }
    if (v.segment == Segment::front) front_area += v.box.size().x * v.box.size().y;
    if (v.segment == Segment::bgo) CHECK(v.material == MaterialId::bgo);
  }
  CHECK(rear == 4);
  CHECK(front_area == doctest::Approx(1.0e4 - 5.5 * 5.5));
}

TEST_CASE("volumes are pairwise disjoint and locate is consistent") {
  const DetectorGeometry g = build_default_geometry();
  const auto vols = g.volumes();
  for (std::size_t i = 0; i < vols.size(); ++i) {
    for (std::size_t j = i + 1; j < vols.size(); ++j) CHECK_FALSE(vols[i].box.interiors_overlap(vols[j].box));
    CHECK(g.locate(vols[i].box.center()) == i);
  }
  const Box bb = g.bounding_box();
  std::mt19937_64 gen(11);
  for (int k = 0; k < 20000; ++k) {
    const Vec3 p{std::uniform_real_distribution<double>(bb.lo.x, bb.hi.x)(gen),
                 std::uniform_real_distribution<double>(bb.lo.y, bb.hi.y)(gen),
                 std::uniform_real_distribution<double>(bb.lo.z, bb.hi.z)(gen)};
    int owners = 0;
    for (const auto &v : vols) owners += v.box.contains(p) ? 1 : 0;
    CHECK(owners <= 1);
    const auto hit = g.locate(p);
    CHECK(hit.has_value() == (owners == 1));
  }
}

TEST_CASE("invalid geometry parameters are rejected") {
  GeometryParams p;
  p.pinhole_side_mm = 200.0;
  CHECK_THROWS_AS(DetectorGeometry{p}, ParameterError);
  p = {};
  p.rear_layers = 0;
  CHECK_THROWS_AS(DetectorGeometry{p}, ParameterError);
  p = {};
  p.module_size_mm = -1.0;
  CHECK_THROWS_AS(DetectorGeometry{p}, ParameterError);
}

TEST_CASE("ray-box intersection") {
  const Box unit{{0, 0, 0}, {1, 1, 1}};
  SUBCASE("axis-aligned crossing") {
    const auto hit = ray_box_intersection({0.5, 0.5, -3.0}, {0, 0, 1}, unit);
    REQUIRE(hit.has_value());
    CHECK(hit->t_in == doctest::Approx(3.0));
    CHECK(hit->t_out - hit->t_in == doctest::Approx(1.0));
  }
  SUBCASE("parallel to a face, outside") {
    CHECK_FALSE(ray_box_intersection({0.5, 1.5, -3.0}, {0, 0, 1}, unit).has_value());
    CHECK_FALSE(ray_box_intersection({-1.0, 0.5, 2.0}, {1, 0, 0}, unit).has_value());
  }
  SUBCASE("origin inside") {
    const auto hit = ray_box_intersection({0.5, 0.5, 0.25}, {0, 0, 1}, unit);
    REQUIRE(hit.has_value());
    CHECK(hit->t_in < 0.0);
    CHECK(hit->t_out == doctest::Approx(0.75));
  }
  SUBCASE("box behind the ray") {
    CHECK_FALSE(ray_box_intersection({0.5, 0.5, 3.0}, {0, 0, 1}, unit).has_value());
  }
  SUBCASE("oblique chord length matches the analytic value") {
    const Vec3 d = normalized({1, 1, 0});
    const auto hit = ray_box_intersection({-0.5, -0.5, 0.5}, d, unit);
    REQUIRE(hit.has_value());
    CHECK(hit->t_out - std::max(hit->t_in, 0.0) == doctest::Approx(std::sqrt(2.0)));
  }
}

TEST_CASE("pixel quantization") {
  // The 1 mm pixel containing (0.4, 0.2) is centred at (0.5, 0.5).
  CHECK(grid_cell_center(0.4, -50.0, 1.0) == doctest::Approx(0.5));
  CHECK(grid_cell_center(0.2, -50.0, 1.0) == doctest::Approx(0.5));
  CHECK(grid_cell_center(-0.2, -50.0, 1.0) == doctest::Approx(-0.5));
  CHECK(grid_cell_center(3.1, -50.0, 2.0) == doctest::Approx(3.0));

  const DetectorGeometry g = build_default_geometry();
  const auto idx_front = g.locate({10.4, 7.2, -1.3});
  REQUIRE(idx_front.has_value());
  const Vec3 qf = g.quantize(*idx_front, {10.4, 7.2, -1.3});
  CHECK(qf.x == doctest::Approx(10.5));
  CHECK(qf.y == doctest::Approx(7.5));
  CHECK(qf.z == doctest::Approx(-2.5));

  // Front pixel cut by the pinhole reports the centre of its material part.
  const auto idx_cut = g.locate({2.9, 0.3, -1.0});
  REQUIRE(idx_cut.has_value());
  const Vec3 qc = g.quantize(*idx_cut, {2.9, 0.3, -1.0});
  CHECK(qc.x == doctest::Approx(2.875));
  CHECK(qc.y == doctest::Approx(0.5));

  // Rear: 2 mm pixels, z at the DOI layer centre.
  const Vec3 pr{-13.7, 21.1, -52.0};
  const auto idx_rear = g.locate(pr);
  REQUIRE(idx_rear.has_value());
  CHECK(g.volume(*idx_rear).layer == 1);
  const Vec3 qr = g.quantize(*idx_rear, pr);
  CHECK(qr.x == doctest::Approx(-13.0));
  CHECK(qr.y == doctest::Approx(21.0));
  CHECK(qr.z == doctest::Approx(-45.0));

  // A point on the upper face stays in the volume's last pixel.
  const Vec3 qe = g.quantize(*idx_rear, {50.0, 0.1, -52.0});
  CHECK(qe.x == doctest::Approx(49.0));

  // Monolithic panels report their centre.
  const Vec3 ps{55.0, 3.0, -40.0};
  const auto idx_side = g.locate(ps);
  REQUIRE(idx_side.has_value());
  CHECK(g.volume(*idx_side).segment == Segment::side);
  CHECK(g.quantize(*idx_side, ps) == g.volume(*idx_side).box.center());
}

TEST_CASE("property: quantized positions stay inside their volume") {
  const DetectorGeometry g = build_default_geometry();
  std::mt19937_64 gen(5);
  for (std::size_t i = 0; i < g.volumes().size(); ++i) {
    const Box b = g.volume(i).box;
    for (int k = 0; k < 500; ++k) {
      const Vec3 p{std::uniform_real_distribution<double>(b.lo.x, b.hi.x)(gen),
                   std::uniform_real_distribution<double>(b.lo.y, b.hi.y)(gen),
                   std::uniform_real_distribution<double>(b.lo.z, b.hi.z)(gen)};
      const Vec3 q = g.quantize(i, p);
      CHECK(b.contains_closed(q, 1e-9));
      if (g.volume(i).pixel_pitch > 0.0) {
        CHECK(std::abs(q.x - p.x) <= g.volume(i).pixel_pitch);
        CHECK(std::abs(q.y - p.y) <= g.volume(i).pixel_pitch);
      }
    }
  }
}

namespace {

const char *kToyTable =
    "energy_keV,mu_pe_per_mm,mu_compton_per_mm\n"
    "10,100,0.1\n"
    "100,1,0.2\n"
    "1000,0.01,0.05\n"
    "3500,0.001,0.02\n";

struct CsvRow {
  double e, pe, c;
};

// Independent reader: stream extraction, no shared parsing code.
std::vector<CsvRow> read_rows(const std::string &path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    CsvRow r{};
    ss >> r.e >> r.pe >> r.c;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("material table parsing and validation") {
  const MaterialTable t = MaterialTable::parse_csv(kToyTable, MaterialId::gagg);
  CHECK(t.energy_kev.size() == 4);
  CHECK_NOTHROW(t.validate());
  CHECK_THROWS_AS(MaterialTable::parse_csv("energy,mu\n10,1\n", MaterialId::gagg), Error);
  CHECK_THROWS_AS(MaterialTable::parse_csv("energy_keV,mu_pe_per_mm,mu_compton_per_mm\n10,abc,1\n", MaterialId::gagg),
                  Error);
  // Parsing validates the grid.
  CHECK_THROWS_AS(MaterialTable::parse_csv("energy_keV,mu_pe_per_mm,mu_compton_per_mm\n10,1,1\n100,1,1\n",
                                           MaterialId::gagg),
                  ParameterError);
  CHECK_THROWS_AS(MaterialTable::parse_csv(
                      "energy_keV,mu_pe_per_mm,mu_compton_per_mm\n10,1,1\n3500,1,1\n100,1,1\n", MaterialId::gagg),
                  ParameterError);
  CHECK_THROWS_AS(MaterialTable::parse_csv("energy_keV,mu_pe_per_mm,mu_compton_per_mm\n10,1,1\n3500,-1,1\n",
                                           MaterialId::gagg),
                  ParameterError);
  MaterialTable edited = t;
  edited.mu_compton[2] = 0.0;
  CHECK_THROWS_AS(edited.validate(), ParameterError);
}

TEST_CASE("attenuation interpolation") {
  const MaterialTable t = MaterialTable::parse_csv(kToyTable, MaterialId::gagg);
  SUBCASE("grid points are exact") {
    CHECK(lookup_attenuation(t, 100.0).photoelectric == 1.0);
    CHECK(lookup_attenuation(t, 100.0).compton == 0.2);
    CHECK(lookup_attenuation(t, 10.0).photoelectric == 100.0);
    CHECK(lookup_attenuation(t, 3500.0).compton == 0.02);
  }
  SUBCASE("log-log midpoint is the geometric mean") {
    const double e = std::sqrt(100.0 * 1000.0);
    const Attenuation a = lookup_attenuation(t, e);
    CHECK(a.photoelectric == doctest::Approx(std::sqrt(1.0 * 0.01)).epsilon(1e-12));
    CHECK(a.compton == doctest::Approx(std::sqrt(0.2 * 0.05)).epsilon(1e-12));
    CHECK(a.total() == doctest::Approx(a.photoelectric + a.compton));
  }
  SUBCASE("outside the grid") {
    CHECK_THROWS_AS(lookup_attenuation(t, 9.99), OutOfRangeError);
    CHECK_THROWS_AS(lookup_attenuation(t, 3500.01), OutOfRangeError);
  }
}

TEST_CASE("bundled GAGG at 662 keV matches an arbitrary-precision re-interpolation") {
  using big = boost::multiprecision::cpp_bin_float_50;
  const std::string path = (MaterialLibrary::default_dir() / "gagg.csv").string();
  const auto rows = read_rows(path);
  REQUIRE(rows.size() > 10);
  const double e = 662.0;
  std::size_t k = 0;
  while (!(rows[k].e <= e && e < rows[k + 1].e)) ++k;
  const big t = log(big(e) / big(rows[k].e)) / log(big(rows[k + 1].e) / big(rows[k].e));
  const big pe = exp(log(big(rows[k].pe)) + t * (log(big(rows[k + 1].pe)) - log(big(rows[k].pe))));
  const big c = exp(log(big(rows[k].c)) + t * (log(big(rows[k + 1].c)) - log(big(rows[k].c))));

  const MaterialLibrary lib = MaterialLibrary::load(MaterialLibrary::default_dir());
  const Attenuation a = lookup_attenuation(lib.gagg, e);
  CHECK(a.photoelectric == doctest::Approx(pe.convert_to<double>()).epsilon(1e-13));
  CHECK(a.compton == doctest::Approx(c.convert_to<double>()).epsilon(1e-13));
}

TEST_CASE("bundled tables are physically sane") {
  const MaterialLibrary lib = MaterialLibrary::load(MaterialLibrary::default_dir());
  for (const MaterialTable *t : {&lib.gagg, &lib.bgo}) {
    CHECK_NOTHROW(t->validate());
    // Photoabsorption dominates at 30 keV and Compton scattering at 1 MeV.
    const Attenuation lo = lookup_attenuation(*t, 30.0);
    const Attenuation hi = lookup_attenuation(*t, 1000.0);
    CHECK(lo.photoelectric > lo.compton);
    CHECK(hi.compton > hi.photoelectric);
  }
  // BGO is the denser, higher-Z absorber.
  CHECK(lookup_attenuation(lib.bgo, 662.0).total() > lookup_attenuation(lib.gagg, 662.0).total());
  CHECK(lookup_attenuation(lib.gagg, 662.0).total() == doctest::Approx(0.05).epsilon(0.2));
}

TEST_CASE("property: ray-box entry and exit points lie on the boundary") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int hits = 0;
  for (int k = 0; k < 20000; ++k) {
    const Vec3 lo{30 * u(gen), 30 * u(gen), 30 * u(gen)};
    const Box box{lo, lo + Vec3{1 + 20 * (u(gen) + 1), 1 + 20 * (u(gen) + 1), 1 + 20 * (u(gen) + 1)}};
    const Vec3 origin{80 * u(gen), 80 * u(gen), 80 * u(gen)};
    // Half the rays aim at an interior point so most of them hit.
    const Vec3 aim = box.lo + Vec3{(box.hi.x - box.lo.x) * (u(gen) + 1) / 2, (box.hi.y - box.lo.y) * (u(gen) + 1) / 2,
                                   (box.hi.z - box.lo.z) * (u(gen) + 1) / 2};
    const Vec3 dir = k % 2 == 0 ? normalized(aim - origin) : normalized({u(gen), u(gen), u(gen)});
    const auto hit = ray_box_intersection(origin, dir, box);
    if (!hit) continue;
    ++hits;
    for (double t : {hit->t_in, hit->t_out}) {
      const Vec3 p = origin + t * dir;
      const double outside = std::max({box.lo.x - p.x, p.x - box.hi.x, box.lo.y - p.y, p.y - box.hi.y,
                                       box.lo.z - p.z, p.z - box.hi.z});
      // On the boundary: inside within tolerance and touching at least one face.
      CHECK(std::abs(outside) < 1e-6);
    }
  }
  CHECK(hits > 10000);
}

TEST_CASE("property: interpolation is monotone where both endpoints decrease") {
  const MaterialLibrary lib = MaterialLibrary::load(MaterialLibrary::default_dir());
  std::mt19937_64 gen(62);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const MaterialTable *t : {&lib.gagg, &lib.bgo}) {
    const auto &e = t->energy_kev;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      std::vector<double> xs(50);
      for (double &x : xs) x = e[i] + (e[i + 1] - e[i]) * u(gen);
      std::sort(xs.begin(), xs.end());
      const bool pe_dec = t->mu_photoelectric[i + 1] < t->mu_photoelectric[i];
      const bool c_dec = t->mu_compton[i + 1] < t->mu_compton[i];
      for (std::size_t k = 1; k < xs.size(); ++k) {
        if (xs[k] == xs[k - 1]) continue;
        const Attenuation a = lookup_attenuation(*t, xs[k - 1]);
        const Attenuation b = lookup_attenuation(*t, xs[k]);
        if (pe_dec) CHECK(b.photoelectric <= a.photoelectric);
        if (c_dec) CHECK(b.compton <= a.compton);
      }
    }
  }
}
