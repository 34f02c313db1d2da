#include "finegrid/speed_control.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <sstream>

#include "finegrid/error.hpp"
#include "finegrid/simd/kernels.hpp"

namespace finegrid {

double KladekForm::operator()(double density) const {
  if (density <= 0.0) return v0;
  if (density >= rho_max) return 0.0;
  return v0 * (1.0 - std::exp(-gamma * (1.0 / density - 1.0 / rho_max)));
}

SpeedDensityCurve SpeedDensityCurve::from_samples(std::vector<Sample> samples) {
  if (samples.empty()) throw Error(ErrorKind::Validation, "speed-density curve has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (!(s.speed >= 0.0) || !std::isfinite(s.density) || !std::isfinite(s.speed)) {
      throw Error(ErrorKind::Validation, "speed-density curve sample " + std::to_string(i) + " is invalid");
    }
    if (i > 0 && !(s.density > samples[i - 1].density)) {
      throw Error(ErrorKind::Validation, "curve densities must be strictly increasing (sample " + std::to_string(i) + ")");
    }
    if (i > 0 && s.speed > samples[i - 1].speed) {
      throw Error(ErrorKind::Validation, "curve speeds must be nonincreasing (sample " + std::to_string(i) + ")");
    }
  }
  SpeedDensityCurve c;
  c.samples_ = std::move(samples);
  return c;
}

SpeedDensityCurve SpeedDensityCurve::kladek(KladekForm form, double step) {
  if (!(form.v0 > 0.0) || !(form.gamma > 0.0) || !(form.rho_max > 0.0) || !(step > 0.0)) {
    throw Error(ErrorKind::Validation, "closed-form curve needs positive v0, gamma, rho_max and step");
  }
  std::vector<Sample> samples;
  const int n = static_cast<int>(std::ceil(form.rho_max / step - 1e-9));
  for (int i = 0; i < n; ++i) samples.push_back({i * step, form(i * step)});
  samples.push_back({form.rho_max, 0.0});
  SpeedDensityCurve c = from_samples(std::move(samples));
  c.analytic_ = form;
  return c;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out, std::chars_format::general);
  return ec == std::errc() && ptr == last;
}

}  // namespace

SpeedDensityCurve SpeedDensityCurve::parse(std::istream& in, const std::string& source_name) {
  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    Sample s{};
    if (tokens.size() != 2 || !parse_double(tokens[0], s.density) || !parse_double(tokens[1], s.speed)) {
      throw Error(ErrorKind::Parse,
                  source_name + ":" + std::to_string(line_no) + ": expected 'density speed', got '" + line + "'");
    }
    samples.push_back(s);
  }
  try {
    return from_samples(std::move(samples));
  } catch (const Error& e) {
    throw Error(e.kind(), source_name + ": " + e.what());
  }
}

SpeedDensityCurve SpeedDensityCurve::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open curve file " + path);
  return parse(in, path);
}

double SpeedDensityCurve::speed_at(double density) const {
  if (analytic_) return (*analytic_)(density);
  if (density <= samples_.front().density) return samples_.front().speed;
  if (density >= samples_.back().density) return samples_.back().speed;
  const auto hi = std::upper_bound(samples_.begin(), samples_.end(), density,
                                   [](double d, const Sample& s) { return d < s.density; });
  const auto lo = hi - 1;
  const double t = (density - lo->density) / (hi->density - lo->density);
  return lo->speed + t * (hi->speed - lo->speed);
}

void SpeedDensityCurve::write(std::ostream& out) const {
  out << "# density(ped/m^2) speed(m/s)\n";
  const auto old = out.flags();
  out << std::fixed << std::setprecision(6);
  for (const Sample& s : samples_) out << s.density << ' ' << s.speed << '\n';
  out.flags(old);
}

void PerceptionConfig::validate() const {
  if (!(width >= 0.1 && width <= 10.0) || !(length >= 0.1 && length <= 10.0)) {
    std::ostringstream os;
    os << "perception area " << length << " x " << width << " m outside [0.1, 10] m";
    throw Error(ErrorKind::Validation, os.str());
  }
}

int heading_sector(double dx, double dy) {
  if (dx == 0.0 && dy == 0.0) throw Error(ErrorKind::UndefinedDirection, "zero heading vector");
  double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  double pos = (deg + 15.0) / 30.0;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) pos = nearest;
  return static_cast<int>(std::floor(pos)) % kSectors;
}

OrientedRect perception_rect(Point center, int sector, const PerceptionConfig& cfg) {
  static constexpr double h = std::numbers::sqrt3 / 2.0;
  static constexpr double cosines[kSectors] = {1.0, h, 0.5, 0.0, -0.5, -h, -1.0, -h, -0.5, 0.0, 0.5, h};
  const int s = ((sector % kSectors) + kSectors) % kSectors;
  const double ux = cosines[s];
  const double uy = cosines[(s + 9) % kSectors];  // sin(a) = cos(a - 90 deg)
  return OrientedRect{center, ux, uy, cfg.length, cfg.width};
}

double local_density(PopulationView peds, const OrientedRect& rect, const Rect& bounds,
                     std::optional<std::size_t> self) {
  const double area = rect.clipped_area(bounds);
  if (area <= 1e-12) return 0.0;
  const simd::OrientedRectF r{static_cast<float>(rect.origin.x), static_cast<float>(rect.origin.y),
                              static_cast<float>(rect.ux),       static_cast<float>(rect.uy),
                              static_cast<float>(rect.length),   static_cast<float>(0.5 * rect.width)};
  std::size_t count = simd::count_in_oriented_rect(peds.xs, peds.ys, r);
  if (self && *self < peds.xs.size()) {
    count -= simd::scalar::count_in_oriented_rect(peds.xs.subspan(*self, 1), peds.ys.subspan(*self, 1), r);
  }
  return static_cast<double>(count) / area;
}

SpeedGate gate_probability(double desired, double step_displacement, double dt) {
  SpeedGate g;
  g.max_moves_per_second = 1.0 / dt;
  g.allowed_moves_per_second = std::min(std::max(desired, 0.0) / step_displacement, g.max_moves_per_second);
  g.move_probability = std::clamp(g.allowed_moves_per_second / g.max_moves_per_second, 0.0, 1.0);
  return g;
}

bool sample_move_allowed(const SpeedGate& gate, Rng& rng) {
  return std::bernoulli_distribution(gate.move_probability)(rng);
}

bool apply_speed_cap(DisplacementLedger& ledger, double proposed, double free_flow, double desired, double now) {
  constexpr double kEps = 1e-9;
  if (now >= ledger.window_start + 1.0 - kEps) {
    ledger.window_start += std::floor(now - ledger.window_start + kEps);
    ledger.accumulated = 0.0;
  }
  const double cap = std::min(free_flow, desired);
  if (ledger.accumulated + proposed > cap + kEps) return false;
  ledger.accumulated += proposed;
  return true;
}

}  // namespace finegrid
