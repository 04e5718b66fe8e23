#include "ccbox/transport.hpp"

#include <algorithm>
#include <cmath>

#include "ccbox/constants.hpp"
#include "ccbox/error.hpp"
#include "ccbox/sampling.hpp"

namespace ccbox {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::grb_point:
      return "grb";
    case SourceKind::cxb:
      return "cxb";
    case SourceKind::albedo:
      return "albedo";
  }
  return "unknown";
}

void SourceSpec::validate() const {
  if (!(e_min_kev > 0.0) || !(e_min_kev < e_max_kev)) throw ParameterError("source: need 0 < E_min < E_max");
  if (!std::isfinite(photon_index)) throw ParameterError("source: photon index must be finite");
  if (!(flux >= 0.0) || !std::isfinite(flux)) throw ParameterError("source: flux must be >= 0");
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw ParameterError("source: duration must be >= 0");
  if (kind == SourceKind::grb_point) {
    if (std::abs(norm(direction) - 1.0) > 1e-9) throw ParameterError("source: direction must be a unit vector");
    // small tolerance for directions that sit on the cap edge after rounding
    if (direction.z < std::cos(fov_half_angle_deg * kDegToRad) - 1e-12) {
      throw ParameterError("source: point source outside the field-of-view cap");
    }
  }
}

double PhotonHistory::deposited_kev() const {
  double sum = 0.0;
  for (const auto &it : interactions) sum += it.deposit_kev;
  return sum;
}

GenerationDisk GenerationDisk::enclosing(const DetectorGeometry &geometry, double margin) {
  const Box b = geometry.bounding_box();
  return {b.center(), (1.0 + margin) * 0.5 * norm(b.size())};
}

double GenerationDisk::area_cm2() const { return kPi * radius_mm * radius_mm / 100.0; }

Photon generate_primary(const SourceSpec &source, const GenerationDisk &disk, Rng &rng) {
  Photon p;
  p.energy_kev = sample_power_law(source.photon_index, source.e_min_kev, source.e_max_kev, rng);
  Vec3 towards_source = source.direction;
  if (source.kind == SourceKind::cxb) towards_source = sample_hemisphere(true, rng);
  if (source.kind == SourceKind::albedo) towards_source = sample_hemisphere(false, rng);

  Vec3 e1, e2;
  orthonormal_basis(towards_source, e1, e2);
  const double r = disk.radius_mm * std::sqrt(rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  p.position = disk.center + disk.radius_mm * towards_source + r * (std::cos(phi) * e1 + std::sin(phi) * e2);
  p.direction = -towards_source;
  return p;
}

namespace {

struct PathSegment {
  double enter;
  double exit;
  std::size_t volume;
};

constexpr int kMaxInteractions = 10000;

}  // namespace

PhotonHistory transport_photon(const Photon &photon, const DetectorGeometry &geometry,
                               const MaterialLibrary &materials, Rng &rng) {
  PhotonHistory history;
  history.initial_energy_kev = photon.energy_kev;
  history.initial_direction = photon.direction;

  Vec3 pos = photon.position;
  Vec3 dir = photon.direction;
  double energy = photon.energy_kev;
  const auto volumes = geometry.volumes();
  std::vector<PathSegment> path;
  path.reserve(volumes.size());

  while (energy > 0.0) {
    path.clear();
    for (std::size_t i = 0; i < volumes.size(); ++i) {
      if (auto hit = ray_box_intersection(pos, dir, volumes[i].box)) {
        path.push_back({std::max(hit->t_in, 0.0), hit->t_out, i});
      }
    }
    std::sort(path.begin(), path.end(), [](const PathSegment &a, const PathSegment &b) { return a.enter < b.enter; });

    // Walk the segments consuming an exponentially distributed optical depth.
    double depth = -std::log(rng.uniform_pos());
    const PathSegment *where = nullptr;
    double t_hit = 0.0;
    Attenuation mu_hit;
    for (const auto &seg : path) {
      const Attenuation mu = lookup_attenuation(materials[volumes[seg.volume].material], energy);
      const double tau = mu.total() * (seg.exit - seg.enter);
      if (depth < tau) {
        where = &seg;
        t_hit = seg.enter + depth / mu.total();
        mu_hit = mu;
        break;
      }
      depth -= tau;
    }
    if (where == nullptr) {
      history.escaped_energy_kev = energy;
      break;
    }

    pos = pos + t_hit * dir;
    Interaction it;
    it.position = pos;
    it.segment = volumes[where->volume].segment;
    it.volume = static_cast<std::uint16_t>(where->volume);

    const bool last_allowed = history.interactions.size() + 1 >= kMaxInteractions;
    if (last_allowed || rng.uniform() * mu_hit.total() < mu_hit.photoelectric) {
      it.process = Process::photoelectric;
      it.deposit_kev = energy;
      energy = 0.0;
      history.interactions.push_back(it);
      break;
    }

    it.process = Process::compton;
    const double theta = sample_klein_nishina(energy, rng);
    const double scattered = compton_outgoing_energy(energy, theta);
    if (scattered < kTrackingCutoffKeV) {
      it.deposit_kev = energy;
      energy = 0.0;
      history.interactions.push_back(it);
      break;
    }
    it.deposit_kev = energy - scattered;
    if (it.deposit_kev > 0.0) history.interactions.push_back(it);
    energy = scattered;
    dir = rotate_direction(dir, std::cos(theta), 2.0 * kPi * rng.uniform());
  }
  return history;
}

double ResolutionModel::sigma_kev(double energy_kev) const {
  if (!(energy_kev > 0.0)) return 0.0;
  return r662 * std::sqrt(662.0 / energy_kev) * energy_kev / kFwhmPerSigma;
}

std::vector<Interaction> apply_resolution(const PhotonHistory &history, const ResolutionModel &model,
                                          const DetectorGeometry &geometry, Rng &rng) {
  std::vector<Interaction> out;
  out.reserve(history.interactions.size());
  for (Interaction it : history.interactions) {
    const double sigma = model.sigma_kev(it.deposit_kev);
    if (sigma > 0.0) it.deposit_kev = std::max(0.0, rng.normal(it.deposit_kev, sigma));
    it.position = geometry.quantize(it.volume, it.position);
    out.push_back(it);
  }
  return out;
}

RunRecord simulate_run(const RunConfig &config, const DetectorGeometry &geometry, const MaterialLibrary &materials) {
  if (config.sources.empty()) throw ParameterError("simulate_run: no sources configured");
  const auto n_point = std::count_if(config.sources.begin(), config.sources.end(),
                                     [](const SourceSpec &s) { return s.kind == SourceKind::grb_point; });
  if (n_point > 1) throw ParameterError("simulate_run: at most one point source");
  for (const auto &s : config.sources) s.validate();

  GenerationDisk disk = GenerationDisk::enclosing(geometry);
  if (config.generation_radius_mm > 0.0) disk.radius_mm = config.generation_radius_mm;

  RunRecord run;
  run.seed = config.seed;
  run.generation_area_cm2 = disk.area_cm2();
  Rng rng(config.seed);

  for (const auto &source : config.sources) {
    if (source.kind == SourceKind::grb_point) {
      run.truth_direction = source.direction;
      run.photon_index = source.photon_index;
      run.flux = source.flux;
    } else {
      run.background = true;
    }
    run.duration_s = std::max(run.duration_s, source.duration_s);

    const std::uint64_t n = rng.poisson(source.flux * disk.area_cm2() * source.duration_s);
    run.generated_photons[static_cast<std::size_t>(source.kind)] += n;
    for (std::uint64_t k = 0; k < n; ++k) {
      const Photon photon = generate_primary(source, disk, rng);
      const PhotonHistory history = transport_photon(photon, geometry, materials, rng);
      if (history.interactions.empty()) continue;
      const auto smeared = apply_resolution(history, config.resolution, geometry, rng);
      try {
        run.events.push_back(build_event(smeared, config.trigger_kev));
        run.event_origin.push_back(source.kind);
      } catch (const SubThresholdError &) {
        // below trigger: not recorded
      }
    }
  }

  // Interleave sources so that list order carries no origin information.
  for (std::size_t k = run.events.size(); k > 1; --k) {
    const auto r = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)), k - 1);
    std::swap(run.events[k - 1], run.events[r]);
    std::swap(run.event_origin[k - 1], run.event_origin[r]);
  }
  return run;
}

}  // namespace ccbox
