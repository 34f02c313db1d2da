#include "finegrid/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "finegrid/error.hpp"

namespace finegrid {

double DemandSchedule::rate_at(double t) const {
  if (breakpoints.empty()) return 0.0;
  if (t <= breakpoints.front().time) return breakpoints.front().rate;
  if (t >= breakpoints.back().time) return breakpoints.back().rate;
  const auto hi = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                                   [](double v, const Breakpoint& b) { return v < b.time; });
  const auto lo = hi - 1;
  const double f = (t - lo->time) / (hi->time - lo->time);
  return lo->rate + f * (hi->rate - lo->rate);
}

void DemandSchedule::validate() const {
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i].rate >= 0.0)) throw Error(ErrorKind::Validation, "demand rate must be >= 0");
    if (i > 0 && !(breakpoints[i].time > breakpoints[i - 1].time)) {
      throw Error(ErrorKind::Validation, "demand breakpoint times must be increasing");
    }
  }
}

namespace {

bool overlaps(const Rect& a, const Rect& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

bool inside(const Rect& inner, double w, double h) {
  constexpr double eps = 1e-9;
  return inner.x_min >= -eps && inner.y_min >= -eps && inner.x_max <= w + eps && inner.y_max <= h + eps;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::Validation, what); }

}  // namespace

void Scenario::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) invalid("grid.width/grid.height must be > 0");
  if (!(cell_size > 0.0)) invalid("grid.cell_size must be > 0");
  if (!(dt > 0.0)) invalid("model.dt must be > 0");
  if (!(duration > 0.0)) invalid("model.duration must be > 0");
  perception.validate();
  transition.validate();
  if (sinks.empty()) invalid("scenario needs at least one [sink]");
  for (const Sink& k : sinks) {
    if (!inside(k.area, width, height)) invalid("sink '" + k.name + "' lies outside the grid");
    for (const Rect& o : obstacles) {
      if (overlaps(k.area, o)) invalid("sink '" + k.name + "' overlaps an obstacle");
    }
  }
  for (const Source& s : sources) {
    if (!inside(s.area, width, height)) invalid("source '" + s.name + "' lies outside the grid");
    for (const Rect& o : obstacles) {
      if (overlaps(s.area, o)) invalid("source '" + s.name + "' overlaps an obstacle");
    }
    if (s.sink >= sinks.size()) invalid("source '" + s.name + "' refers to a missing sink");
    if (s.profiles.empty()) invalid("source '" + s.name + "' has no profile");
    try {
      s.demand.validate();
      for (const ProfileShare& p : s.profiles) {
        p.profile.validate();
        if (!(p.weight > 0.0)) invalid("profile weight must be > 0");
        if (cell_size > p.profile.body_depth) invalid("profile '" + p.profile.label + "' is thinner than one cell");
      }
    } catch (const Error& e) {
      invalid("source '" + s.name + "': " + e.what());
    }
  }
  if (reporting_area && !inside(*reporting_area, width, height)) invalid("reporting.rect lies outside the grid");
}

Scenario walkway_scenario(double cell_size, double ramp) {
  Scenario s;
  s.width = 30.0;
  s.height = 4.0;
  s.cell_size = cell_size;
  // cross wall with a 0.5 m door; the queue behind it supplies the dense samples
  s.obstacles.push_back(Rect{26.0, 0.0, 26.3, 1.75});
  s.obstacles.push_back(Rect{26.0, 2.25, 26.3, 4.0});
  s.sinks.push_back({"exit", Rect{29.5, 1.5, 30.0, 2.5}});
  Source src;
  src.name = "entrance";
  src.area = Rect{0.0, 0.0, 1.0, 4.0};
  src.demand.breakpoints = {{0.0, 1.0}, {ramp, 7.0}};
  src.profiles.push_back({BodyProfile{}, 1.0});
  s.sources.push_back(src);
  s.reporting_area = Rect{10.0, 0.0, 20.0, 4.0};
  s.duration = ramp;
  return s;
}

namespace {

class Parser {
 public:
  Parser(std::istream& in, std::string name, std::string base_dir)
      : in_(in), name_(std::move(name)), base_dir_(std::move(base_dir)) {}

  Scenario run();

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, name_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  double number(std::string_view tok) const {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc() || ptr != last) fail("expected a number, got '" + std::string(tok) + "'");
    return v;
  }

  std::vector<std::string> words(const std::string& value) const {
    std::istringstream ss(value);
    std::vector<std::string> out;
    for (std::string w; ss >> w;) out.push_back(w);
    return out;
  }

  Rect rect(const std::string& value) const {
    const auto w = words(value);
    if (w.size() != 4) fail("rect needs 'x_min y_min x_max y_max'");
    try {
      return Rect::make(number(w[0]), number(w[1]), number(w[2]), number(w[3]));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  double scalar(const std::string& value) const {
    const auto w = words(value);
    if (w.size() != 1) fail("expected a single number");
    return number(w[0]);
  }

  void grid_key(Scenario& s, const std::string& key, const std::string& value);
  void model_key(Scenario& s, const std::string& key, const std::string& value);
  void source_key(Source& src, std::string& sink_ref, const std::string& key, const std::string& value);

  std::istream& in_;
  std::string name_;
  std::string base_dir_;
  int line_no_ = 0;
};

void Parser::grid_key(Scenario& s, const std::string& key, const std::string& value) {
  if (key == "width") s.width = scalar(value);
  else if (key == "height") s.height = scalar(value);
  else if (key == "cell_size") s.cell_size = scalar(value);
  else fail("unknown key '" + key + "' in [grid]");
}

void Parser::model_key(Scenario& s, const std::string& key, const std::string& value) {
  if (key == "curve") {
    const auto w = words(value);
    if (w.size() != 1) fail("curve needs one path");
    std::filesystem::path p(w[0]);
    if (p.is_relative()) p = std::filesystem::path(base_dir_) / p;
    s.curve_path = p.lexically_normal().string();
    try {
      s.curve = SpeedDensityCurve::load(s.curve_path);
    } catch (const Error& e) {
      fail(e.what());
    }
  } else if (key == "perception_width") {
    s.perception.width = scalar(value);
  } else if (key == "perception_length") {
    s.perception.length = scalar(value);
  } else if (key == "transition") {
    try {
      s.transition.model = transition_model_from_string(value.substr(0, value.find_last_not_of(" \t") + 1));
    } catch (const Error& e) {
      fail(e.what());
    }
  } else if (key == "beta") {
    s.transition.beta = scalar(value);
  } else if (key == "lambda") {
    s.transition.lambda = scalar(value);
  } else if (key == "dt") {
    s.dt = scalar(value);
  } else if (key == "duration") {
    s.duration = scalar(value);
  } else if (key == "seed") {
    const auto w = words(value);
    uint64_t v = 0;
    if (w.size() != 1) fail("seed needs one integer");
    auto [ptr, ec] = std::from_chars(w[0].data(), w[0].data() + w[0].size(), v);
    if (ec != std::errc() || ptr != w[0].data() + w[0].size()) fail("seed must be a nonnegative integer");
    s.seed = v;
  } else {
    fail("unknown key '" + key + "' in [model]");
  }
}

void Parser::source_key(Source& src, std::string& sink_ref, const std::string& key, const std::string& value) {
  if (key == "name") {
    src.name = value;
  } else if (key == "rect") {
    src.area = rect(value);
  } else if (key == "sink") {
    sink_ref = value;
  } else if (key == "demand") {
    // "t:rate t:rate ..."
    for (const std::string& w : words(value)) {
      const auto colon = w.find(':');
      if (colon == std::string::npos) fail("demand breakpoint must be 'time:rate', got '" + w + "'");
      src.demand.breakpoints.push_back(
          {number(std::string_view(w).substr(0, colon)), number(std::string_view(w).substr(colon + 1))});
    }
  } else if (key == "profile") {
    // "label shoulder_width body_depth free_flow_speed [weight]"
    const auto w = words(value);
    if (w.size() != 4 && w.size() != 5) fail("profile needs 'label shoulder_width body_depth speed [weight]'");
    ProfileShare p;
    p.profile.label = w[0];
    p.profile.shoulder_width = number(w[1]);
    p.profile.body_depth = number(w[2]);
    p.profile.free_flow_speed = number(w[3]);
    if (w.size() == 5) p.weight = number(w[4]);
    src.profiles.push_back(p);
  } else {
    fail("unknown key '" + key + "' in [source]");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Scenario Parser::run() {
  Scenario s;
  s.obstacles.clear();
  s.sources.clear();
  s.sinks.clear();
  s.reporting_area.reset();

  enum class Section { None, Grid, Obstacle, Source, Sink, Reporting, Model };
  Section section = Section::None;
  std::map<std::string, int> seen_once;
  std::vector<std::string> sink_refs;
  std::vector<int> source_lines;
  bool obstacle_has_rect = true;

  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_no_;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      if (!obstacle_has_rect) fail("[obstacle] section without rect");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "grid" || name == "reporting" || name == "model") {
        if (seen_once[name]++) fail("section [" + name + "] given twice");
      }
      if (name == "grid") section = Section::Grid;
      else if (name == "model") section = Section::Model;
      else if (name == "reporting") section = Section::Reporting;
      else if (name == "obstacle") {
        section = Section::Obstacle;
        s.obstacles.push_back({});
        obstacle_has_rect = false;
      } else if (name == "sink") {
        section = Section::Sink;
        s.sinks.push_back({"sink" + std::to_string(s.sinks.size()), {}});
      } else if (name == "source") {
        section = Section::Source;
        Source src;
        src.name = "source" + std::to_string(s.sources.size());
        s.sources.push_back(src);
        sink_refs.emplace_back();
        source_lines.push_back(line_no_);
      } else {
        fail("unknown section [" + name + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected 'key = value'");

    switch (section) {
      case Section::None: fail("key '" + key + "' outside any section");
      case Section::Grid: grid_key(s, key, value); break;
      case Section::Model: model_key(s, key, value); break;
      case Section::Obstacle:
        if (key != "rect") fail("unknown key '" + key + "' in [obstacle]");
        s.obstacles.back() = rect(value);
        obstacle_has_rect = true;
        break;
      case Section::Reporting:
        if (key != "rect") fail("unknown key '" + key + "' in [reporting]");
        s.reporting_area = rect(value);
        break;
      case Section::Sink:
        if (key == "name") s.sinks.back().name = value;
        else if (key == "rect") s.sinks.back().area = rect(value);
        else fail("unknown key '" + key + "' in [sink]");
        break;
      case Section::Source: source_key(s.sources.back(), sink_refs.back(), key, value); break;
    }
  }
  if (!obstacle_has_rect) fail("[obstacle] section without rect");

  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    Source& src = s.sources[i];
    if (src.profiles.empty()) src.profiles.push_back({BodyProfile{}, 1.0});
    const std::string& ref = sink_refs[i];
    if (ref.empty()) continue;
    const auto it = std::find_if(s.sinks.begin(), s.sinks.end(), [&](const Sink& k) { return k.name == ref; });
    if (it == s.sinks.end()) {
      throw Error(ErrorKind::Validation, name_ + ":" + std::to_string(source_lines[i]) + ": source '" + src.name +
                                             "' refers to unknown sink '" + ref + "'");
    }
    src.sink = static_cast<std::size_t>(it - s.sinks.begin());
  }
  s.validate();
  return s;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& source_name, const std::string& base_dir) {
  return Parser(in, source_name, base_dir).run();
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario file " + path);
  const auto base = std::filesystem::path(path).parent_path();
  return parse_scenario(in, path, base.empty() ? "." : base.string());
}

namespace {

std::ostream& operator<<(std::ostream& os, const Rect& r) {
  return os << r.x_min << ' ' << r.y_min << ' ' << r.x_max << ' ' << r.y_max;
}

}  // namespace

void write_scenario(std::ostream& out, const Scenario& s) {
  out << std::setprecision(17);
  out << "[grid]\nwidth = " << s.width << "\nheight = " << s.height << "\ncell_size = " << s.cell_size << "\n";
  for (const Rect& o : s.obstacles) out << "\n[obstacle]\nrect = " << o << "\n";
  for (const Sink& k : s.sinks) out << "\n[sink]\nname = " << k.name << "\nrect = " << k.area << "\n";
  for (const Source& src : s.sources) {
    out << "\n[source]\nname = " << src.name << "\nrect = " << src.area << "\nsink = " << s.sinks[src.sink].name
        << "\ndemand =";
    for (const auto& b : src.demand.breakpoints) out << ' ' << b.time << ':' << b.rate;
    out << '\n';
    for (const ProfileShare& p : src.profiles) {
      out << "profile = " << p.profile.label << ' ' << p.profile.shoulder_width << ' ' << p.profile.body_depth << ' '
          << p.profile.free_flow_speed << ' ' << p.weight << '\n';
    }
  }
  if (s.reporting_area) out << "\n[reporting]\nrect = " << *s.reporting_area << "\n";
  out << "\n[model]\n";
  if (!s.curve_path.empty()) out << "curve = " << s.curve_path << "\n";
  out << "perception_width = " << s.perception.width << "\nperception_length = " << s.perception.length
      << "\ntransition = " << to_string(s.transition.model) << "\nbeta = " << s.transition.beta
      << "\nlambda = " << s.transition.lambda << "\ndt = " << s.dt << "\nseed = " << s.seed
      << "\nduration = " << s.duration << "\n";
}

}  // namespace finegrid
