#include "interlace/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "interlace/green.hpp"
#include "interlace/noise.hpp"
#include "interlace/percolation.hpp"
#include "interlace/potential.hpp"
#include "interlace/renorm.hpp"
#include "interlace/resistance.hpp"
#include "interlace/sampler.hpp"
#include "interlace/thresholds.hpp"

namespace interlace {

using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "interlace 1.0.0";

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string coords(const Point& p, char sep = ',') {
  std::string s;
  for (int a = 0; a < p.dim(); ++a) {
    if (a) s += sep;
    s += std::to_string(p[a]);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Typed access to the parameter object; records what was read (with
// defaults) so the manifest shows the full effective configuration.
class Params {
 public:
  Params(const json& in, std::string command, std::set<std::string> allowed)
      : in_(in), command_(std::move(command)), allowed_(std::move(allowed)) {
    if (!in_.is_object()) throw ValidationError("config", "must be a JSON object");
    for (const auto& [key, value] : in_.items()) {
      if (!allowed_.contains(key)) throw ValidationError(key, "is not a parameter of '" + command_ + "'");
    }
  }

  bool has(const std::string& k) const { return in_.contains(k) && !in_.at(k).is_null(); }

  double real(const std::string& k, std::optional<double> def = std::nullopt) {
    double x = 0;
    if (!has(k)) {
      if (!def) throw ValidationError(k, "is required");
      x = *def;
    } else {
      x = to_real(k, in_.at(k));
    }
    out_[k] = x;
    return x;
  }

  long long integer(const std::string& k, std::optional<long long> def = std::nullopt) {
    long long x = 0;
    if (!has(k)) {
      if (!def) throw ValidationError(k, "is required");
      x = *def;
    } else {
      x = to_integer(k, in_.at(k));
    }
    out_[k] = x;
    return x;
  }

  std::uint64_t seed() {
    if (!has("seed")) throw ValidationError("seed", "is required (no wall-clock seeding)");
    const json& v = in_.at("seed");
    std::uint64_t s = 0;
    if (v.is_number_unsigned()) {
      s = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<long long>() >= 0) {
      s = static_cast<std::uint64_t>(v.get<long long>());
    } else if (v.is_string()) {
      const std::string t = v.get<std::string>();
      if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("seed", "must be a nonnegative integer");
      }
      try {
        s = std::stoull(t);
      } catch (const std::exception&) {
        throw ValidationError("seed", "does not fit in 64 bits");
      }
    } else {
      throw ValidationError("seed", "must be a nonnegative integer");
    }
    out_["seed"] = s;
    return s;
  }

  std::string text(const std::string& k, std::optional<std::string> def = std::nullopt) {
    std::string x;
    if (!has(k)) {
      if (!def) throw ValidationError(k, "is required");
      x = *def;
    } else if (in_.at(k).is_string()) {
      x = in_.at(k).get<std::string>();
    } else {
      throw ValidationError(k, "must be a string");
    }
    out_[k] = x;
    return x;
  }

  bool flag(const std::string& k, bool def) {
    bool x = def;
    if (has(k)) {
      const json& v = in_.at(k);
      if (v.is_boolean()) {
        x = v.get<bool>();
      } else if (v.is_string() && (v == "true" || v == "false")) {
        x = v == "true";
      } else {
        throw ValidationError(k, "must be true or false");
      }
    }
    out_[k] = x;
    return x;
  }

  std::vector<double> reals(const std::string& k, std::optional<std::vector<double>> def = std::nullopt) {
    std::vector<double> x;
    if (!has(k)) {
      if (!def) throw ValidationError(k, "is required");
      x = *def;
    } else {
      for (const json& item : list(k)) x.push_back(to_real(k, item));
    }
    if (x.empty()) throw ValidationError(k, "must be nonempty");
    out_[k] = x;
    return x;
  }

  std::vector<long long> integers(const std::string& k, std::optional<std::vector<long long>> def = std::nullopt) {
    std::vector<long long> x;
    if (!has(k)) {
      if (!def) throw ValidationError(k, "is required");
      x = *def;
    } else {
      for (const json& item : list(k)) x.push_back(to_integer(k, item));
    }
    if (x.empty()) throw ValidationError(k, "must be nonempty");
    out_[k] = x;
    return x;
  }

  std::vector<std::string> strings(const std::string& k, std::vector<std::string> def) {
    std::vector<std::string> x = def;
    if (has(k)) {
      x.clear();
      const json& v = in_.at(k);
      if (v.is_string()) {
        x.push_back(v.get<std::string>());
      } else if (v.is_array()) {
        for (const json& item : v) {
          if (!item.is_string()) throw ValidationError(k, "must be a list of strings");
          x.push_back(item.get<std::string>());
        }
      } else {
        throw ValidationError(k, "must be a string or a list of strings");
      }
    }
    out_[k] = x;
    return x;
  }

  const json& effective() const { return out_; }

 private:
  std::vector<json> list(const std::string& k) const {
    const json& v = in_.at(k);
    std::vector<json> items;
    if (v.is_array()) {
      for (const json& item : v) items.push_back(item);
    } else if (v.is_string()) {
      for (const std::string& part : split(v.get<std::string>(), ',')) items.push_back(trim(part));
    } else {
      items.push_back(v);
    }
    return items;
  }

  static double to_real(const std::string& k, const json& v) {
    double x = 0;
    if (v.is_number()) {
      x = v.get<double>();
    } else if (v.is_string()) {
      const std::string t = trim(v.get<std::string>());
      std::size_t used = 0;
      try {
        x = std::stod(t, &used);
      } catch (const std::exception&) {
        throw ValidationError(k, "'" + t + "' is not a number");
      }
      if (used != t.size()) throw ValidationError(k, "'" + t + "' is not a number");
    } else {
      throw ValidationError(k, "must be a number");
    }
    if (!std::isfinite(x)) throw ValidationError(k, "must be finite");
    return x;
  }

  static long long to_integer(const std::string& k, const json& v) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
      throw ValidationError(k, "must be an integer");
    }
    if (v.is_string()) {
      const std::string t = trim(v.get<std::string>());
      std::size_t used = 0;
      long long x = 0;
      try {
        x = std::stoll(t, &used);
      } catch (const std::exception&) {
        throw ValidationError(k, "'" + t + "' is not an integer");
      }
      if (used != t.size()) throw ValidationError(k, "'" + t + "' is not an integer");
      return x;
    }
    throw ValidationError(k, "must be an integer");
  }

  const json& in_;
  std::string command_;
  std::set<std::string> allowed_;
  json out_ = json::object();
};

const std::set<std::string> kGlobal = {"seed", "threads", "dim"};

std::set<std::string> allowed(std::initializer_list<const char*> keys) {
  std::set<std::string> s = kGlobal;
  for (const char* k : keys) s.insert(k);
  return s;
}

struct Common {
  int dim = 3;
  std::uint64_t seed = 0;
  int threads = 1;
};

Common read_common(Params& p) {
  Common c;
  c.seed = p.seed();
  c.dim = static_cast<int>(p.integer("dim", 3));
  try {
    require_dimension(c.dim);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("dim", e.what());
  }
  c.threads = static_cast<int>(p.integer("threads", 1));
  if (c.threads < 1 || c.threads > 256) throw ValidationError("threads", "must lie in [1, 256]");
  return c;
}

std::size_t read_replicas(Params& p, long long def) {
  const long long r = p.integer("replicas", def);
  if (r < 1) throw ValidationError("replicas", "must be at least 1");
  if (r > 100000000) throw ValidationError("replicas", "is unreasonably large");
  return static_cast<std::size_t>(r);
}

double read_probability(Params& p, const std::string& k, double def) {
  const double x = p.real(k, def);
  if (!(x >= 0 && x <= 1)) throw ValidationError(k, "must lie in [0, 1]");
  return x;
}

Point parse_point(const std::string& field, const std::string& text, int dim) {
  const auto parts = split(trim(text), ',');
  if (static_cast<int>(parts.size()) != dim) {
    throw ValidationError(field, "point '" + text + "' needs " + std::to_string(dim) + " coordinates");
  }
  Point p(dim);
  for (int a = 0; a < dim; ++a) {
    const std::string t = trim(parts[a]);
    std::size_t used = 0;
    try {
      p[a] = std::stoi(t, &used);
    } catch (const std::exception&) {
      throw ValidationError(field, "bad coordinate '" + t + "'");
    }
    if (used != t.size()) throw ValidationError(field, "bad coordinate '" + t + "'");
  }
  return p;
}

// "ball:R" (B(0, R)), "cube:S" ([0, S)^d) or "x1,..,xd:s1,..,sd".
Window parse_window(const std::string& text, int dim) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ValidationError("window", "expected ball:R, cube:S or corner:sides, got '" + text + "'");
  auto positive = [&](const std::string& t) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(trim(t), &used);
    } catch (const std::exception&) {
      throw ValidationError("window", "bad size '" + t + "'");
    }
    if (used != trim(t).size()) throw ValidationError("window", "bad size '" + t + "'");
    return v;
  };
  if (parts[0] == "ball") {
    const int r = positive(parts[1]);
    if (r < 0) throw ValidationError("window", "ball radius must be nonnegative");
    return Window::ball(Point(dim), r);
  }
  if (parts[0] == "cube") {
    const int s = positive(parts[1]);
    if (s < 1) throw ValidationError("window", "cube side must be positive");
    return Window::cube(Point(dim), s);
  }
  const Point corner = parse_point("window", parts[0], dim);
  const auto sides_text = split(parts[1], ',');
  if (static_cast<int>(sides_text.size()) != dim) throw ValidationError("window", "needs " + std::to_string(dim) + " sides");
  std::vector<int> sides;
  for (const auto& t : sides_text) {
    const int s = positive(t);
    if (s < 1) throw ValidationError("window", "sides must be positive");
    sides.push_back(s);
  }
  return Window(corner, sides);
}

std::vector<Point> parse_point_set(const std::string& field, const std::string& text, int dim) {
  std::vector<Point> pts;
  for (const auto& part : split(text, ';')) {
    if (!trim(part).empty()) pts.push_back(parse_point(field, part, dim));
  }
  if (pts.empty()) throw ValidationError(field, "empty point set");
  return pts;
}

SampleMode read_mode(Params& p) {
  const std::string m = p.text("mode", "exact");
  if (m == "exact") return SampleMode::exact;
  if (m == "truncated") return SampleMode::truncated;
  throw ValidationError("mode", "must be exact or truncated");
}

std::size_t read_support_cap(Params& p) {
  const long long c = p.integer("support_cap", 8192);
  if (c < 1 || c > 20000) throw ValidationError("support_cap", "must lie in [1, 20000]");
  return static_cast<std::size_t>(c);
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& work) {
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += workers) work(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::uint64_t> seeds_for(std::uint64_t seed, std::size_t replicas, const std::string& tag) {
  std::vector<std::uint64_t> s(replicas);
  for (std::size_t r = 0; r < replicas; ++r) s[r] = derive_seed(seed, r, tag);
  return s;
}

std::string coordinate_header(int dim) {
  std::string h;
  for (int a = 1; a <= dim; ++a) h += "x" + std::to_string(a) + ",";
  return h;
}

// ---------------------------------------------------------------------------

RunRecord run_capacity(const json& in) {
  Params p(in, "capacity", allowed({"set", "support_cap"}));
  const Common c = read_common(p);
  const std::string path = p.text("set");
  PotentialOptions po;
  po.support_cap = read_support_cap(p);
  std::ifstream f(path);
  if (!f) throw ValidationError("set", "cannot read '" + path + "'");
  std::vector<Point> K;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ' ', ',');
    std::replace(line.begin(), line.end(), '\t', ',');
    std::string compact;
    for (const auto& part : split(line, ',')) {
      if (part.empty()) continue;
      compact += (compact.empty() ? "" : ",") + part;
    }
    K.push_back(parse_point("set", compact, c.dim));
  }
  if (K.empty()) throw ValidationError("set", "'" + path + "' holds no points");

  GreenFunction green(c.dim);
  const EquilibriumSystem sys(green, K, po);
  const auto& prof = sys.profile();
  std::string csv = coordinate_header(c.dim) + "e_K,e_K_normalized\n";
  for (std::size_t i = 0; i < prof.points.size(); ++i) {
    csv += coords(prof.points[i]) + "," + num(prof.weights[i]) + "," + num(prof.normalized[i]) + "\n";
  }
  RunRecord rec;
  rec.command = "capacity";
  rec.config = p.effective();
  rec.outputs.push_back({"capacity.csv", csv});
  rec.summary = {{"capacity", prof.capacity},
                 {"points", prof.points.size()},
                 {"support", sys.support().size()},
                 {"residual", prof.residual}};
  rec.stdout_text = "capacity," + num(prof.capacity) + "\n";
  return rec;
}

struct Perturbation {
  double eps = 0;
  double p_site = 1;
  double p_bond = 1;
};

Perturbation read_perturbation(Params& p) {
  Perturbation t;
  t.eps = read_probability(p, "eps", 0.0);
  t.p_site = read_probability(p, "p_site", 1.0);
  t.p_bond = read_probability(p, "p_bond", 1.0);
  return t;
}

RunRecord run_sample(const json& in) {
  Params p(in, "sample", allowed({"u", "window", "mode", "safety_radius", "replicas", "eps", "p_site", "p_bond",
                                  "probe", "write_sets", "support_cap"}));
  const Common c = read_common(p);
  const double u = p.real("u");
  if (!(u > 0)) throw ValidationError("u", "must be positive");
  const Window w = parse_window(p.text("window"), c.dim);
  SamplerOptions so;
  so.mode = read_mode(p);
  so.safety_radius = static_cast<int>(p.integer("safety_radius", 0));
  if (so.safety_radius < 0) throw ValidationError("safety_radius", "must be nonnegative");
  if (so.mode == SampleMode::truncated && so.safety_radius != 0 && so.safety_radius < w.linf_radius()) {
    throw ValidationError("safety_radius", "must be at least the window radius");
  }
  so.potential.support_cap = read_support_cap(p);
  const std::size_t replicas = read_replicas(p, 1);
  const Perturbation noise = read_perturbation(p);
  const bool write_sets = p.flag("write_sets", true);
  std::vector<std::vector<Point>> probes;
  for (const auto& text : p.strings("probe", {coords(w.center())})) {
    auto set = parse_point_set("probe", text, c.dim);
    for (const Point& x : set) {
      if (!w.contains(x)) throw ValidationError("probe", "point " + x.str() + " lies outside the window");
    }
    probes.push_back(std::move(set));
  }

  GreenFunction green(c.dim);
  const WindowSampler sampler(green, w, so);

  std::vector<std::string> rows(replicas), sets(replicas);
  parallel_for(replicas, c.threads, [&](std::size_t r) {
    Rng rng = make_stream(c.seed, r, "sample");
    const InterlacementSample s = sampler.sample(u, rng);
    const SiteField noisy = noise.eps > 0 ? flip_noise(s.occupied, noise.eps, rng) : s.occupied;
    const SiteField site_keep = bernoulli_site(w, noise.p_site, rng);
    const BondField bond_keep = bernoulli_bond(w, noise.p_bond, rng);
    std::size_t diluted_sites = 0, diluted_bonds = 0;
    for (std::size_t v = 0; v < w.vertex_count(); ++v) diluted_sites += noisy[v] && site_keep[v];
    for (std::size_t e = 0; e < w.edge_count(); ++e) diluted_bonds += s.traversed[e] && bond_keep[e];
    std::string row = std::to_string(r) + "," + std::to_string(s.count) + "," + std::to_string(s.occupied.count()) +
                      "," + std::to_string(s.traversed.count()) + "," + std::to_string(w.vertex_count() - s.occupied.count()) +
                      "," + std::to_string(noisy.count()) + "," + std::to_string(diluted_sites) + "," +
                      std::to_string(diluted_bonds) + "," + num(s.error_bound);
    for (const auto& set : probes) {
      bool all_vacant = true;
      for (const Point& x : set) all_vacant = all_vacant && !s.occupied[w.index(x)];
      row += all_vacant ? ",1" : ",0";
    }
    rows[r] = row + "\n";
    if (write_sets) {
      std::string t = "replica " + std::to_string(r) + " N " + std::to_string(s.count) + "\noccupied";
      for (std::size_t v = 0; v < w.vertex_count(); ++v) {
        if (s.occupied[v]) t += " " + coords(w.point(v));
      }
      t += "\ntraversed";
      for (std::size_t e = 0; e < w.edge_count(); ++e) {
        if (!s.traversed[e]) continue;
        const auto [a, b] = w.edge_endpoints(e);
        t += " " + coords(w.point(a)) + "|" + coords(w.point(b));
      }
      sets[r] = t + "\n";
    }
  });

  std::string csv = "replica,N,occupied,traversed,vacant,noisy_occupied,diluted_occupied,diluted_traversed,error_bound";
  for (std::size_t i = 0; i < probes.size(); ++i) csv += ",probe" + std::to_string(i + 1) + "_vacant";
  csv += "\n";
  for (const auto& r : rows) csv += r;

  RunRecord rec;
  rec.command = "sample";
  rec.config = p.effective();
  rec.replica_seeds = seeds_for(c.seed, replicas, "sample");
  rec.outputs.push_back({"sample.csv", csv});
  if (write_sets) {
    std::string all = "# window " + w.str() + " u " + num(u) + "\n";
    for (const auto& s : sets) all += s;
    rec.outputs.push_back({"sample_sets.txt", all});
  }
  rec.summary = {{"capacity", sampler.capacity()}, {"window", w.str()}};
  if (so.mode == SampleMode::truncated) {
    rec.summary["safety_radius"] = sampler.safety_radius();
    rec.summary["error_bound"] = u * sampler.capacity() * sampler.sphere_hitting_max();
  }
  return rec;
}

RunRecord run_analyze(const json& in) {
  Params p(in, "analyze", allowed({"u", "window", "mode", "safety_radius", "replicas", "eps", "p_site", "p_bond",
                                   "target", "adjacency", "L", "slab", "k", "support_cap"}));
  const Common c = read_common(p);
  const double u = p.real("u");
  if (!(u > 0)) throw ValidationError("u", "must be positive");
  const Window w = parse_window(p.text("window"), c.dim);
  SamplerOptions so;
  so.mode = read_mode(p);
  so.safety_radius = static_cast<int>(p.integer("safety_radius", 0));
  so.potential.support_cap = read_support_cap(p);
  const std::size_t replicas = read_replicas(p, 1);
  const Perturbation noise = read_perturbation(p);
  const std::string target = p.text("target", "vacant");
  if (target != "vacant" && target != "occupied" && target != "trace") {
    throw ValidationError("target", "must be vacant, occupied or trace");
  }
  const std::string adj_text = p.text("adjacency", "nearest");
  if (adj_text != "nearest" && adj_text != "star") throw ValidationError("adjacency", "must be nearest or star");
  const Adjacency adjacency = adj_text == "star" ? Adjacency::star : Adjacency::nearest;
  if (adjacency == Adjacency::star && (target == "trace" || noise.p_bond < 1)) {
    throw ValidationError("adjacency", "star adjacency needs a site configuration (no trace target, no bond dilution)");
  }
  int inner_room = w.side(0);
  for (int a = 0; a < c.dim; ++a) inner_room = std::min(inner_room, (w.side(a) - 1) / 2);
  const int L = static_cast<int>(p.integer("L", std::max(0, inner_room / 2)));
  if (L < 0 || 2 * L > inner_room) throw ValidationError("L", "B(centre, 2L) must fit in the window");
  const int slab = static_cast<int>(p.integer("slab", 0));
  if (slab < 0) throw ValidationError("slab", "must be nonnegative");
  for (int a = 2; a < c.dim && slab > 0; ++a) {
    if (slab > w.side(a)) throw ValidationError("slab", "exceeds the window extent");
  }
  const int k = static_cast<int>(p.integer("k", 0));
  if (k < 0) throw ValidationError("k", "must be nonnegative");

  GreenFunction green(c.dim);
  const WindowSampler sampler(green, w, so);
  const Point centre = w.center();

  std::vector<std::string> rows(replicas);
  parallel_for(replicas, c.threads, [&](std::size_t r) {
    Rng rng = make_stream(c.seed, r, "analyze");
    const InterlacementSample s = sampler.sample(u, rng);
    const SiteField noisy = noise.eps > 0 ? flip_noise(s.occupied, noise.eps, rng) : s.occupied;
    const SiteField site_keep = bernoulli_site(w, noise.p_site, rng);
    const BondField bond_keep = bernoulli_bond(w, noise.p_bond, rng);
    Configuration cfg;
    if (target == "trace") {
      BondField b(w);
      for (std::size_t e = 0; e < w.edge_count(); ++e) b.set(e, s.traversed[e] && bond_keep[e]);
      cfg = Configuration::from_bonds(std::move(b));
    } else {
      SiteField sites(w);
      for (std::size_t v = 0; v < w.vertex_count(); ++v) {
        const bool base = target == "vacant" ? !noisy[v] : noisy[v];
        sites.set(v, base && site_keep[v]);
      }
      cfg = noise.p_bond < 1 ? Configuration::from_sites_and_bonds(std::move(sites), bond_keep)
                             : Configuration::from_sites(std::move(sites));
    }
    if (slab > 0) cfg = slab_restrict(cfg, slab);
    const ComponentLabeling lab = components(cfg, adjacency);
    const bool cross = L > 0 && crossing(cfg, centre, L);
    const SiteField filtered = diameter_filter(cfg, k, adjacency);
    rows[r] = std::to_string(r) + "," + std::to_string(s.count) + "," + std::to_string(lab.active) + "," +
              std::to_string(lab.count()) + "," + std::to_string(lab.max_size()) + "," +
              std::to_string(lab.max_diameter()) + "," + (L > 0 ? (cross ? "1" : "0") : "") + "," +
              std::to_string(filtered.count()) + "\n";
  });
  std::string csv = "replica,N,active,components,max_size,max_diameter,crossing,filtered\n";
  for (const auto& r : rows) csv += r;
  RunRecord rec;
  rec.command = "analyze";
  rec.config = p.effective();
  rec.replica_seeds = seeds_for(c.seed, replicas, "analyze");
  rec.outputs.push_back({"analyze.csv", csv});
  rec.summary = {{"capacity", sampler.capacity()}, {"window", w.str()}, {"crossing_L", L}};
  return rec;
}

RunRecord run_renorm_check(const json& in) {
  Params p(in, "renorm-check", allowed({"L0", "l0", "n", "u", "p", "eps", "replicas", "separation", "support_cap"}));
  const Common c = read_common(p);
  const int L0 = static_cast<int>(p.integer("L0", 2));
  const int l0 = static_cast<int>(p.integer("l0", 2));
  const int n = static_cast<int>(p.integer("n", 1));
  if (L0 < 1) throw ValidationError("L0", "must be positive");
  if (l0 < 2) throw ValidationError("l0", "must be at least 2");
  if (n < 0 || n > 4) throw ValidationError("n", "must lie in [0, 4]");
  const double u = p.real("u", 1.0);
  if (!(u > 0)) throw ValidationError("u", "must be positive");
  const double prob = read_probability(p, "p", 1.0);
  const double eps = read_probability(p, "eps", 0.0);
  if (eps >= 0.5) throw ValidationError("eps", "must lie in [0, 1/2)");
  const std::size_t replicas = read_replicas(p, 100);
  std::optional<long long> sep;
  if (p.has("separation")) {
    sep = p.integer("separation");
    if (*sep < 1) throw ValidationError("separation", "must be positive");
  }
  SamplerOptions so;
  so.potential.support_cap = read_support_cap(p);
  const ScaleHierarchy h(c.dim, L0, l0, sep);
  const long long Ln = h.L(n);
  if (Ln + L0 > 400) throw ValidationError("n", "level-n box is too large for a window sample");
  const int side = static_cast<int>(Ln + L0);
  const Window w = Window::cube(Point(c.dim), side);
  const long long per_side = h.blocks_per_side(n);
  const Window blocks = Window::cube(Point(c.dim), static_cast<int>(per_side));

  GreenFunction green(c.dim);
  const double m = density(u, green);
  const WindowSampler sampler(green, w, so);

  struct Counts {
    std::size_t E = 0, F = 0, D = 0, bad = 0;
    std::vector<std::uint8_t> recursive;
  };
  std::vector<Counts> per(replicas);
  parallel_for(replicas, c.threads, [&](std::size_t r) {
    Rng rng = make_stream(c.seed, r, "renorm-check");
    const InterlacementSample s = sampler.sample(u, rng);
    BondField trace = s.traversed;
    if (eps > 0) {
      // noisy trace: edges whose endpoints are both noisy-occupied
      const SiteField noisy = coupled_noise(s.occupied, eps, rng);
      for (std::size_t e = 0; e < w.edge_count(); ++e) {
        const auto [a, b] = w.edge_endpoints(e);
        trace.set(e, trace[e] && noisy[a] && noisy[b]);
      }
    }
    const BondField dilution = bernoulli_bond(w, prob, rng);
    Counts& cnt = per[r];
    BlockField field;
    field.L0 = L0;
    field.bad = SiteField(blocks);
    for (std::size_t i = 0; i < blocks.vertex_count(); ++i) {
      const Point x = blocks.point(i).scaled(L0);
      const bool E = eval_seed_E(trace, x, L0, m);
      const bool F = eval_seed_F(trace, x, L0, m);
      const bool D = eval_seed_D(dilution, x, L0);
      cnt.E += E;
      cnt.F += F;
      cnt.D += D;
      const bool bad = !E || !F || D;
      cnt.bad += bad;
      field.bad.set(i, bad);
    }
    for (int k = 0; k <= n; ++k) cnt.recursive.push_back(eval_recursive(field, h, Point(c.dim), k));
  });

  const double nb = static_cast<double>(blocks.vertex_count()) * static_cast<double>(replicas);
  std::size_t E = 0, F = 0, D = 0, bad = 0;
  std::vector<std::size_t> rec_count(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& cnt : per) {
    E += cnt.E;
    F += cnt.F;
    D += cnt.D;
    bad += cnt.bad;
    for (int k = 0; k <= n; ++k) rec_count[static_cast<std::size_t>(k)] += cnt.recursive[static_cast<std::size_t>(k)];
  }
  std::string csv = "statistic,level,count,trials,estimate,ci_lo,ci_hi\n";
  auto row = [&](const std::string& name, int level, std::size_t k, double trials) {
    const auto t = static_cast<std::size_t>(trials);
    const Interval ci = wilson_interval(k, t);
    csv += name + "," + std::to_string(level) + "," + std::to_string(k) + "," + std::to_string(t) + "," +
           num(static_cast<double>(k) / trials) + "," + num(ci.lo) + "," + num(ci.hi) + "\n";
  };
  row("seed_E_good", 0, E, nb);
  row("seed_F_good", 0, F, nb);
  row("seed_D_bad", 0, D, nb);
  row("block_bad", 0, bad, nb);
  for (int k = 0; k <= n; ++k) row("recursive_bad", k, rec_count[static_cast<std::size_t>(k)], static_cast<double>(replicas));
  const double p_seed = static_cast<double>(bad) / nb;
  for (int k = 0; k <= n; ++k) {
    csv += "decoupling_bound," + std::to_string(k) + ",,," + num(decoupling_bound(l0, c.dim, k, p_seed)) + ",,\n";
  }

  RunRecord rec;
  rec.command = "renorm-check";
  rec.config = p.effective();
  rec.replica_seeds = seeds_for(c.seed, replicas, "renorm-check");
  rec.outputs.push_back({"renorm_check.csv", csv});
  rec.summary = {{"density_m", m},
                 {"l_of_d", l_of_d(c.dim)},
                 {"separation", h.separation()},
                 {"asymptotic_regime", h.asymptotic_regime()},
                 {"window", w.str()},
                 {"L_n", Ln}};
  return rec;
}

RunRecord run_estimate(const json& in) {
  Params p(in, "estimate", allowed({"what", "eps", "L", "u_min", "u_max", "u_step", "replicas", "tolerance",
                                    "support_cap"}));
  const Common c = read_common(p);
  const std::string what = p.text("what", "curves");
  if (what != "u-star-eps" && what != "u-star-star" && what != "u-bar" && what != "curves") {
    throw ValidationError("what", "must be u-star-eps, u-star-star, u-bar or curves");
  }
  std::vector<double> eps = p.reals("eps", std::vector<double>{0.0});
  for (double e : eps) {
    if (!(e >= 0 && e < 0.5)) throw ValidationError("eps", "values must lie in [0, 1/2)");
  }
  if (what == "u-star-star" || what == "u-bar") eps = {0.0};
  const std::vector<long long> Ls = p.integers("L", std::vector<long long>{6});
  for (long long L : Ls) {
    if (L < 2 || L > 24) throw ValidationError("L", "values must lie in [2, 24]");
  }
  const double u_step = p.real("u_step", 0.25);
  if (!(u_step > 0)) throw ValidationError("u_step", "must be positive");
  const double u_min = p.real("u_min", u_step);
  const double u_max = p.real("u_max", 6.0);
  if (!(u_min > 0 && u_max >= u_min)) throw ValidationError("u_min", "need 0 < u_min <= u_max");
  const std::size_t replicas = read_replicas(p, 100);
  const double tolerance = p.real("tolerance", 1e-3);
  if (!(tolerance > 0)) throw ValidationError("tolerance", "must be positive");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double u = u_min + i * u_step;
    if (u > u_max * (1 + 1e-12)) break;
    grid.push_back(std::min(u, u_max));
  }
  GreenFunction green(c.dim);

  std::string est_csv = "parameter,L,eps,ok,value,ci_lo,ci_hi,replicas,note\n";
  std::string curve_csv = "curve,L,eps,u,replicas,successes,p,ci_lo,ci_hi\n";
  auto curve_rows = [&](const std::string& name, const std::vector<CurvePoint>& pts) {
    for (const auto& pt : pts) {
      curve_csv += name + "," + std::to_string(pt.L) + "," + num(pt.eps) + "," + num(pt.u) + "," +
                   std::to_string(pt.replicas) + "," + std::to_string(pt.successes) + "," + num(pt.p) + "," +
                   num(pt.ci.lo) + "," + num(pt.ci.hi) + "\n";
    }
  };
  auto est_row = [&](const ThresholdEstimate& e, int L) {
    std::string note = e.ok ? e.protocol : e.failure;
    std::replace(note.begin(), note.end(), ',', ';');
    est_csv += e.parameter + "," + std::to_string(L) + "," + num(e.eps) + "," + (e.ok ? "1" : "0") + "," +
               (e.ok ? num(e.value) : "") + "," + (e.ok ? num(e.ci.lo) : "") + "," + (e.ok ? num(e.ci.hi) : "") + "," +
               std::to_string(e.replicas) + "," + note + "\n";
  };
  json facts = json::array();
  for (long long L : Ls) {
    StudyConfig sc;
    sc.L = static_cast<int>(L);
    sc.eps = eps;
    sc.u_max = u_max;
    sc.u_grid = grid;
    sc.local_uniqueness = what == "u-bar";
    sc.replicas = replicas;
    sc.seed = c.seed;
    sc.threads = c.threads;
    sc.potential.support_cap = read_support_cap(p);
    const ThresholdStudy study = run_threshold_study(green, sc);
    facts.push_back({{"L", L}, {"capacity", study.capacity}});
    if (what == "curves") {
      for (std::size_t k = 0; k < eps.size(); ++k) curve_rows("crossing", crossing_curve(study, k, grid));
    } else if (what == "u-bar") {
      const ThresholdEstimate e = estimate_u_bar(study);
      est_row(e, sc.L);
      std::vector<CurvePoint> conn, uniq;
      for (const auto& pt : local_uniqueness_table(study)) {
        CurvePoint a;
        a.L = sc.L;
        a.u = pt.u;
        a.replicas = pt.replicas;
        a.successes = pt.connected;
        a.p = static_cast<double>(pt.connected) / static_cast<double>(pt.replicas);
        a.ci = wilson_interval(pt.connected, pt.replicas);
        conn.push_back(a);
        a.successes = pt.unique;
        a.p = static_cast<double>(pt.unique) / static_cast<double>(pt.replicas);
        a.ci = wilson_interval(pt.unique, pt.replicas);
        uniq.push_back(a);
      }
      curve_rows("connection", conn);
      curve_rows("local_uniqueness", uniq);
      curve_rows("joint", e.curve);
    } else {
      for (std::size_t k = 0; k < eps.size(); ++k) {
        ThresholdEstimate e = what == "u-star-star" ? estimate_u_star_star(study, tolerance)
                                                    : estimate_u_star_eps(study, k, tolerance);
        est_row(e, sc.L);
        curve_rows("crossing", e.curve);
      }
    }
  }

  RunRecord rec;
  rec.command = "estimate";
  rec.config = p.effective();
  rec.replica_seeds = seeds_for(c.seed, replicas, "threshold/L" + std::to_string(Ls.front()));
  if (what != "curves") rec.outputs.push_back({"estimate.csv", est_csv});
  rec.outputs.push_back({"estimate_curves.csv", curve_csv});
  rec.summary = {{"windows", facts},
                 {"protocol", "crossing of B(0,L) -> sphere(0,2L) in B(0,2L); threshold probability 1/2; "
                              "replica seeds use tag threshold/L<L>"}};
  return rec;
}

RunRecord run_resistance(const json& in) {
  Params p(in, "resistance", allowed({"u", "law", "N_max", "N_grid", "replicas", "graph", "support_cap"}));
  const Common c = read_common(p);
  const std::string graph = p.text("graph", "interlacement");
  if (graph != "interlacement" && graph != "full") throw ValidationError("graph", "must be interlacement or full");
  const double u = p.real("u", 1.0);
  if (!(u > 0)) throw ValidationError("u", "must be positive");
  ResistanceLaw law;
  try {
    law = ResistanceLaw::parse(p.text("law", "constant:1"));
  } catch (const std::invalid_argument& e) {
    throw ValidationError("law", e.what());
  }
  const int N_max = static_cast<int>(p.integer("N_max", 8));
  if (N_max < 1 || N_max > 64) throw ValidationError("N_max", "must lie in [1, 64]");
  std::vector<long long> def;
  for (int N = 1; N <= N_max; ++N) def.push_back(N);
  const std::vector<long long> grid_ll = p.integers("N_grid", def);
  std::vector<int> Ns;
  for (long long N : grid_ll) {
    if (N < 1 || N > N_max) throw ValidationError("N_grid", "values must lie in [1, N_max]");
    Ns.push_back(static_cast<int>(N));
  }
  if (!std::is_sorted(Ns.begin(), Ns.end())) throw ValidationError("N_grid", "must be increasing");
  const std::size_t replicas = read_replicas(p, 10);
  const Window w = Window::ball(Point(c.dim), N_max);

  std::string csv = "replica,N,R_eff,source,cluster_size\n";
  std::string summary_csv = "N,q1,median,q3\n";
  json summary;
  if (graph == "full") {
    const Configuration cfg = Configuration::from_bonds(BondField(w, true));
    std::vector<std::vector<double>> prof(replicas);
    parallel_for(replicas, c.threads, [&](std::size_t r) {
      Rng rng = make_stream(c.seed, r, "resistance");
      prof[r] = resistance_profile(cfg, assign_resistances(w.edge_count(), law, rng), w.center(), Ns);
    });
    for (std::size_t r = 0; r < replicas; ++r) {
      for (std::size_t i = 0; i < Ns.size(); ++i) {
        csv += std::to_string(r) + "," + std::to_string(Ns[i]) + "," + num(prof[r][i]) + "," +
               coords(w.center(), ' ') + "," + std::to_string(w.vertex_count()) + "\n";
      }
    }
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      std::vector<double> col;
      for (const auto& pr : prof) col.push_back(pr[i]);
      std::sort(col.begin(), col.end());
      auto q = [&](double f) {
        const double pos = f * static_cast<double>(col.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, col.size() - 1);
        return col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
      };
      summary_csv += std::to_string(Ns[i]) + "," + num(q(0.25)) + "," + num(q(0.5)) + "," + num(q(0.75)) + "\n";
    }
  } else {
    GreenFunction green(c.dim);
    SamplerOptions so;
    so.potential.support_cap = read_support_cap(p);
    const WindowSampler sampler(green, w, so);
    const TransienceSummary t = transience_profile(sampler, u, Ns, law, replicas, c.seed, c.threads);
    for (std::size_t r = 0; r < replicas; ++r) {
      const auto& rep = t.replicas[r];
      for (std::size_t i = 0; i < Ns.size(); ++i) {
        csv += std::to_string(r) + "," + std::to_string(Ns[i]) + "," + num(rep.resistance[i]) + "," +
               coords(rep.source, ' ') + "," + std::to_string(rep.cluster_size) + "\n";
      }
    }
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      summary_csv += std::to_string(Ns[i]) + "," + num(t.q1[i]) + "," + num(t.median[i]) + "," + num(t.q3[i]) + "\n";
    }
    summary["monotonicity_violations"] = t.monotonicity_violations;
    summary["capacity"] = sampler.capacity();
  }
  summary["note"] = "finite-window profiles; a bounded profile is evidence of transience, not a proof";
  RunRecord rec;
  rec.command = "resistance";
  rec.config = p.effective();
  rec.replica_seeds = seeds_for(c.seed, replicas, "resistance");
  rec.outputs.push_back({"resistance.csv", csv});
  rec.outputs.push_back({"resistance_summary.csv", summary_csv});
  rec.summary = summary;
  return rec;
}

}  // namespace

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> c = {"capacity", "sample", "analyze", "renorm-check", "estimate", "resistance"};
  return c;
}

std::string config_hash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

RunRecord run_experiment(const std::string& command, const json& params) {
  RunRecord rec;
  if (command == "capacity") {
    rec = run_capacity(params);
  } else if (command == "sample") {
    rec = run_sample(params);
  } else if (command == "analyze") {
    rec = run_analyze(params);
  } else if (command == "renorm-check") {
    rec = run_renorm_check(params);
  } else if (command == "estimate") {
    rec = run_estimate(params);
  } else if (command == "resistance") {
    rec = run_resistance(params);
  } else {
    throw ValidationError("command", "unknown subcommand '" + command + "'");
  }
  rec.config_hash = config_hash(json{{"command", command}, {"config", rec.config}});
  return rec;
}

json run_manifest(const RunRecord& rec, double seconds) {
  json m;
  m["version"] = kVersion;
  m["command"] = rec.command;
  m["config"] = rec.config;
  m["config_hash"] = rec.config_hash;
  m["generator"] = std::string(Rng::name());
  m["seed_derivation"] =
      "base = mix64(seed ^ mix64(fnv1a64(tag))); stream_key = mix64(base + replica * 0x9E3779B97F4A7C15)";
  m["replica_seeds"] = rec.replica_seeds;
  m["timing_seconds"] = seconds;
  json outputs = json::array();
  for (const auto& o : rec.outputs) outputs.push_back(o.name);
  m["outputs"] = outputs;
  m["summary"] = rec.summary;
  return m;
}

std::string csv_schema() {
  return R"(capacity.csv         one row per point of K
  x1..xd               coordinates
  e_K                  equilibrium measure (zero off the inner boundary of K)
  e_K_normalized       e_K / cap(K)

sample.csv           one row per replica
  replica              replica index (stream = derive_seed(seed, replica, "sample"))
  N                    trajectories meeting the window, Poisson(u cap(W))
  occupied             |I^u ∩ W|
  traversed            edges of the window crossed by some trajectory
  vacant               |V^u ∩ W|
  noisy_occupied       |I^{u,eps} ∩ W| (flip noise)
  diluted_occupied     |I^{u,eps} ∩ B^p_site ∩ W|
  diluted_traversed    traversed edges kept by bond dilution p_bond
  error_bound          truncated mode: u cap(W) max_{|x-c|=R_s} P_x[H_W < inf]; 0 in exact mode
  probe<i>_vacant      1 if every point of probe set i is vacant

sample_sets.txt      per replica: "replica r N n", then "occupied" followed by
                     x1,..,xd tokens, then "traversed" followed by
                     x1,..,xd|y1,..,yd tokens

analyze.csv          one row per replica
  replica, N
  active               active vertices of the configuration
  components           number of components
  max_size             largest component size
  max_diameter         largest l∞ diameter (-1 when empty)
  crossing             1 if B(c,L) connects to the sphere of radius 2L (empty when L = 0)
  filtered             vertices in components of diameter >= k

renorm_check.csv     statistic,level,count,trials,estimate,ci_lo,ci_hi
  seed_E_good          fraction of blocks where E holds
  seed_F_good          fraction of blocks where F holds
  seed_D_bad           fraction of blocks where some box edge is closed
  block_bad            fraction of bad blocks
  recursive_bad        recursive bad event at level k for the box at the origin
  decoupling_bound     (l0^{2d} p + 1/4)^{2^k} with p = block_bad estimate

estimate.csv         parameter,L,eps,ok,value,ci_lo,ci_hi,replicas,note
  parameter            u_star_eps | u_star_star | u_bar
  ok                   0 when the estimator reports failure (note says why)
  note                 protocol description or failure reason

estimate_curves.csv  curve,L,eps,u,replicas,successes,p,ci_lo,ci_hi
  curve                crossing | connection | local_uniqueness | joint
  ci_lo, ci_hi         95% Wilson interval

resistance.csv       replica,N,R_eff,source,cluster_size
  R_eff                effective resistance from source to the sphere of radius N (inf if disconnected)
  source               space-separated coordinates of the source vertex

resistance_summary.csv  N,q1,median,q3 over replicas
)";
}

}  // namespace interlace
