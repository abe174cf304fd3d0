// pk: command-line driver for the library. Every run writes CSV tables with
// JSON sidecars and a manifest.json into the output directory.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pk/cusp.hpp"
#include "pk/density.hpp"
#include "pk/error.hpp"
#include "pk/glauber.hpp"
#include "pk/kernels.hpp"
#include "pk/lattice.hpp"
#include "pk/nbrw.hpp"
#include "pk/slope_field.hpp"

#ifndef PK_VERSION
#define PK_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pk;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitModuleBase = 10;  // + static_cast<int>(Errc)
constexpr int kExitInternal = 70;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw IoError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string num(int64_t v) { return std::to_string(v); }

// Bounded worker pool: fn(i) for i in [0, count); the first exception (by
// index) is rethrown after all workers stop.
template <class F>
void parallel_for(size_t count, unsigned threads, F fn) {
  std::atomic<size_t> next{0};
  std::mutex mu;
  size_t failed_at = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          error = std::current_exception();
        }
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ----- configuration --------------------------------------------------------

struct Globals {
  uint64_t seed = 1;
  unsigned threads = 1;
  double tolerance = 1e-8;
  std::string out_dir;
  std::string config_path;
};

// Experiment config: a JSON object (schema version 1), or a plain density
// config file, which is read as {"density_file": <path>}.
struct Experiment {
  json cfg = json::object();
  fs::path base = ".";
  std::string raw;
};

[[noreturn]] void config_error(const std::string& msg) { fail(Errc::ConfigError, msg); }

Experiment load_experiment(const std::string& path) {
  Experiment e;
  if (path.empty()) {
    e.raw = "{}";
    return e;
  }
  e.raw = read_file(path);
  e.base = fs::path(path).parent_path();
  const auto first = e.raw.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && e.raw[first] == '{') {
    try {
      e.cfg = json::parse(e.raw);
    } catch (const json::exception& ex) {
      config_error(std::string("config is not valid JSON: ") + ex.what());
    }
    if (e.cfg.contains("version") && e.cfg["version"] != 1) config_error("unsupported config version");
  } else {
    e.cfg = {{"density_file", fs::path(path).filename().string()}};
  }
  return e;
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

const json& section(const Experiment& e, const std::string& key) {
  static const json empty = json::object();
  if (!e.cfg.contains(key)) return empty;
  if (!e.cfg[key].is_object()) config_error("config section '" + key + "' must be an object");
  return e.cfg[key];
}

std::vector<int64_t> n_list(const Experiment& e, std::vector<int64_t> fallback) {
  const auto ns = get_or(e.cfg, "n", fallback);
  if (ns.empty()) config_error("n list is empty");
  for (size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 1) config_error("n values must be positive");
    if (k > 0 && ns[k] <= ns[k - 1]) config_error("n values must be sorted ascending");
  }
  return ns;
}

struct Model {
  DensityProfile rho;
  double beta = 0.5;
  SlopeField field{symmetric_two_block(), 0.5};
  CuspData cusp;
};

DensityConfig density_of(const Experiment& e) {
  if (e.cfg.contains("density_file")) {
    const fs::path p = e.base / e.cfg["density_file"].get<std::string>();
    std::ifstream is(p);
    if (!is) throw IoError("cannot read " + p.string());
    return read_density_config(is);
  }
  DensityConfig dc;
  if (!e.cfg.contains("density") || e.cfg["density"] == "symmetric") {
    dc.profile = symmetric_two_block();
    return dc;
  }
  const json& d = e.cfg["density"];
  if (!d.is_object() || !d.contains("pieces")) config_error("density must be \"symmetric\" or {pieces: [...]}");
  std::vector<DensityPiece> pieces;
  for (const auto& p : d["pieces"]) pieces.push_back({p.at("a").get<double>(), p.at("b").get<double>(), p.at("rho").get<double>()});
  std::optional<std::pair<double, double>> gap;
  if (d.contains("gap")) gap = std::make_pair(d["gap"].at(0).get<double>(), d["gap"].at(1).get<double>());
  dc.profile = DensityProfile(pieces, gap);
  return dc;
}

// beta precedence: config `beta`, then the density file's beta, then
// `target_slope` (fixed point of z_c -> match_drift), else 1/2.
Model resolve_model(const Experiment& e) {
  const DensityConfig dc = density_of(e);
  Model m;
  m.rho = dc.profile;
  std::optional<double> beta = dc.beta;
  if (e.cfg.contains("beta")) beta = get_or(e.cfg, "beta", 0.5);
  std::optional<double> slope = dc.target_slope;
  if (e.cfg.contains("target_slope")) slope = get_or(e.cfg, "target_slope", 1.0);
  if (!beta && slope) {
    double b = 0.5;
    bool settled = false;
    for (int it = 0; it < 200 && !settled; ++it) {
      const CuspData c = solve_cusp(SlopeField(m.rho, b));
      const double nb = match_drift(*slope, m.rho, c.z_c);
      settled = std::abs(nb - b) < 1e-14;
      b = nb;
    }
    if (!settled) fail(Errc::NotConverged, "beta/z_c fixed point for target_slope did not settle");
    beta = b;
  }
  m.beta = beta.value_or(0.5);
  m.field = SlopeField(m.rho, m.beta);
  m.cusp = solve_cusp_full(m.field);
  return m;
}

// Labels -M..N of the quantile initial data: M = floor(n m_left), N = floor(n m_right).
ParticleConfig initial_data(const Model& m, int64_t n) {
  const auto M = static_cast<int64_t>(std::floor(double(n) * m.rho.mass_left() + 1e-9));
  const auto N = static_cast<int64_t>(std::floor(double(n) * m.rho.mass_right() + 1e-9));
  return quantile_initial(m.rho, n, M, N);
}

LatticeDomain domain_of(const json& j, const fs::path& base) {
  if (j.contains("file")) {
    const fs::path p = base / j["file"].get<std::string>();
    std::ifstream is(p);
    if (!is) throw IoError("cannot read " + p.string());
    return read_domain(is);
  }
  const auto h = get_or(j, "hexagon", std::vector<int64_t>{2, 2, 2});
  if (h.size() != 3) config_error("hexagon needs [a, b, c]");
  return hexagon(h[0], h[1], h[2]);
}

// ----- outputs ----------------------------------------------------------------

class Output {
 public:
  Output(fs::path dir, std::string subcommand) : dir_(std::move(dir)), sub_(std::move(subcommand)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string());
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows, const json& params) {
    std::string body;
    auto line = [&](const std::vector<std::string>& cells) {
      for (size_t k = 0; k < cells.size(); ++k) body += (k ? "," : "") + cells[k];
      body += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    write(name + ".csv", body);
    json side = {{"subcommand", sub_}, {"table", name + ".csv"}, {"columns", header}, {"rows", rows.size()},
                 {"parameters", params}};
    write(name + ".json", side.dump(2) + "\n");
  }

  void text(const std::string& name, const std::string& body) { write(name, body); }

  const std::map<std::string, std::string>& checksums() const { return sums_; }
  const fs::path& dir() const { return dir_; }

 private:
  void write(const std::string& name, const std::string& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os || !(os << body)) throw IoError("cannot write " + (dir_ / name).string());
    sums_[name] = "sha256:" + sha256_hex(body);
  }

  fs::path dir_;
  std::string sub_;
  std::map<std::string, std::string> sums_;
};

struct Context {
  Globals g;
  Experiment e;
  Output& out;
  json summary = json::object();
};

// ----- subcommands -------------------------------------------------------------

int cmd_cusp_solve(Context& c) {
  const Model m = resolve_model(c.e);
  const CuspData& k = m.cusp;
  json j = {{"x_c", k.x_c}, {"t_c", k.t_c}, {"z_c", k.z_c}, {"A", k.A}, {"B", k.B}, {"beta", m.beta},
            {"residuals", {{"g", k.residual_g}, {"t", k.residual_t}, {"x", k.residual_x}}},
            {"warnings", k.warnings}};
  // Optional `expect` block: each listed field must match within --tolerance.
  bool ok = true;
  if (c.e.cfg.contains("expect")) {
    for (const auto& [key, want] : c.e.cfg["expect"].items()) {
      if (!j.contains(key) || !j[key].is_number()) config_error("expect names an unknown field '" + key + "'");
      const double err = std::abs(j[key].get<double>() - want.get<double>());
      j["checks"][key] = {{"expected", want}, {"abs_err", err}, {"pass", err <= c.g.tolerance}};
      ok = ok && err <= c.g.tolerance;
    }
  }
  std::cout << j.dump(2) << "\n";
  c.out.text("cusp_solution.json", j.dump(2) + "\n");
  c.out.csv("cusp", {"x_c", "t_c", "z_c", "A", "B", "beta"},
            {{num(k.x_c), num(k.t_c), num(k.z_c), num(k.A), num(k.B), num(m.beta)}}, {});
  c.summary = j;
  return ok ? 0 : kExitChecksFailed;
}

int cmd_simulate_nbrw(Context& c) {
  const Model m = resolve_model(c.e);
  const json& s = section(c.e, "simulate");
  const auto ns = n_list(c.e, {60});
  const auto replicas = get_or<int64_t>(s, "replicas", 1);
  if (replicas < 1) config_error("replicas must be positive");
  const auto taus = get_or(s, "taus", std::vector<double>{0.0});
  std::vector<std::vector<std::string>> traj_rows, scaled_rows;
  for (int64_t n : ns) {
    const ParticleConfig d = initial_data(m, n);
    const int64_t T = get_or<int64_t>(s, "horizon", default_horizon(m.cusp.t_c, n));
    const PearceyFrame frame{n, m.cusp.x_c, m.cusp.t_c, m.cusp.A, m.cusp.B};
    std::vector<std::vector<ParticleConfig>> trajs(static_cast<size_t>(replicas));
    std::vector<std::vector<std::vector<double>>> scaled(static_cast<size_t>(replicas));
    parallel_for(trajs.size(), c.g.threads, [&](size_t r) {
      trajs[r] = simulate(d, m.beta, T, c.g.seed + 7919 * static_cast<uint64_t>(n) + r);
      scaled[r] = rescale_pearcey(trajs[r], frame, taus);
    });
    for (size_t r = 0; r < trajs.size(); ++r) {
      for (size_t step = 0; step < trajs[r].size(); ++step) {
        const ParticleConfig& x = trajs[r][step];
        for (size_t i = 0; i < x.size(); ++i)
          traj_rows.push_back({num(n), num(int64_t(r)), num(int64_t(step)), num(int64_t(i) - x.M), num(x.pos[i])});
      }
      for (size_t k = 0; k < taus.size(); ++k)
        for (size_t i = 0; i < scaled[r][k].size(); ++i)
          scaled_rows.push_back({num(n), num(int64_t(r)), num(taus[k]), num(int64_t(i) - d.M), num(scaled[r][k][i])});
    }
  }
  const json params = {{"n", ns}, {"beta", m.beta}, {"replicas", replicas}, {"taus", taus}, {"seed", c.g.seed}};
  c.out.csv("trajectories", {"n", "replica", "step", "label", "position"}, traj_rows, params);
  c.out.csv("pearcey_positions", {"n", "replica", "tau", "label", "rescaled"}, scaled_rows, params);
  return 0;
}

int cmd_kernel_compare(Context& c) {
  const Model m = resolve_model(c.e);
  const json& s = section(c.e, "compare");
  const auto ns = n_list(c.e, {250});
  const auto pts =
      get_or(s, "points", std::vector<std::vector<double>>{{0, 0, 0, 0}, {0, 1, 0, 0}, {0.5, 0, 0, 1}, {0, 0, 0.5, 1}});
  for (const auto& p : pts)
    if (p.size() != 4) config_error("each compare point is [tau1, gamma1, tau2, gamma2]");
  const double max_diff = get_or(s, "max_abs_diff", -1.0);
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (int64_t n : ns) {
    const ParticleConfig d = initial_data(m, n);
    std::vector<RescaledPair> res(pts.size());
    parallel_for(pts.size(), c.g.threads,
                 [&](size_t k) { res[k] = rescaled_kernel_pair(pts[k][0], pts[k][1], pts[k][2], pts[k][3], n, d, m.cusp); });
    for (const auto& r : res) {
      const double diff = std::abs(r.lhs.value.real() - r.rhs.value.real());
      if (max_diff > 0 && diff > max_diff) ok = false;
      rows.push_back({num(n), num(r.tau1), num(r.gamma1), num(r.tau2), num(r.gamma2), num(r.p1.t), num(r.p1.x),
                      num(r.p2.t), num(r.p2.x), num(r.lhs.value.real()), num(r.rhs.value.real()), num(diff),
                      num(r.lhs.abs_error_estimate), num(r.rhs.abs_error_estimate)});
    }
  }
  c.out.csv("kernel_compare",
            {"n", "tau1", "gamma1", "tau2", "gamma2", "t1", "x1", "t2", "x2", "lhs", "rhs", "abs_diff", "lhs_err", "rhs_err"},
            rows, {{"n", ns}, {"beta", m.beta}, {"max_abs_diff", max_diff}});
  return ok ? 0 : kExitChecksFailed;
}

int cmd_pearcey_eval(Context& c) {
  const json& s = section(c.e, "pearcey");
  const auto S = get_or(s, "s", std::vector<double>{0}), X = get_or(s, "x", std::vector<double>{0});
  const auto T = get_or(s, "t", std::vector<double>{0}), Y = get_or(s, "y", std::vector<double>{0});
  std::vector<std::array<double, 4>> args;
  for (double a : S)
    for (double b : X)
      for (double t : T)
        for (double y : Y) args.push_back({a, b, t, y});
  std::vector<KernelValue> vals(args.size());
  parallel_for(args.size(), c.g.threads,
               [&](size_t k) { vals[k] = kernel_pearcey(args[k][0], args[k][1], args[k][2], args[k][3]); });
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (size_t k = 0; k < args.size(); ++k) {
    ok = ok && vals[k].abs_error_estimate <= c.g.tolerance;
    rows.push_back({num(args[k][0]), num(args[k][1]), num(args[k][2]), num(args[k][3]), num(vals[k].value.real()),
                    num(vals[k].value.imag()), num(vals[k].abs_error_estimate)});
  }
  c.out.csv("pearcey", {"s", "x", "t", "y", "re", "im", "err"}, rows, {{"tolerance", c.g.tolerance}});
  return ok ? 0 : kExitChecksFailed;
}

int cmd_gap_prob(Context& c) {
  json sets = c.e.cfg.contains("gaps") ? c.e.cfg["gaps"] : json::array({{{"times", {0.0}}, {"intervals", {{-1.0, 1.0}}}}});
  if (!sets.is_array()) config_error("gaps must be a list");
  struct Set {
    std::vector<double> times;
    std::vector<std::pair<double, double>> intervals;
  };
  std::vector<Set> in;
  for (const auto& j : sets) {
    Set st;
    st.times = get_or(j, "times", std::vector<double>{});
    for (const auto& iv : j.at("intervals")) st.intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    if (st.times.size() != st.intervals.size()) config_error("one time per gap interval");
    if (st.times.size() > 6) config_error("at most 6 times per gap set");
    in.push_back(st);
  }
  const KernelBlockFn K = pearcey_block_kernel();
  std::vector<FredholmResult> res(in.size());
  parallel_for(in.size(), c.g.threads,
               [&](size_t k) { res[k] = fredholm_gap(in[k].times, in[k].intervals, K, 16, c.g.tolerance); });
  std::vector<std::vector<std::string>> rows;
  for (size_t k = 0; k < in.size(); ++k) {
    std::string ts, ivs;
    for (size_t b = 0; b < in[k].times.size(); ++b) {
      ts += (b ? " " : "") + num(in[k].times[b]);
      ivs += (b ? " " : "") + num(in[k].intervals[b].first) + ":" + num(in[k].intervals[b].second);
    }
    rows.push_back({num(int64_t(k)), ts, ivs, num(res[k].value), num(res[k].change), num(int64_t(res[k].order))});
  }
  c.out.csv("gap_prob", {"set", "times", "intervals", "value", "change", "order"}, rows, {{"tolerance", c.g.tolerance}});
  return 0;
}

int cmd_sample_tiling(Context& c) {
  const json& s = section(c.e, "tiling");
  const LatticeDomain dom = domain_of(s, c.e.base);
  const auto samples = get_or<int64_t>(s, "samples", 10);
  if (samples < 1) config_error("samples must be positive");
  std::optional<uint64_t> updates;
  if (s.contains("updates")) updates = get_or<uint64_t>(s, "updates", 0);
  std::vector<Tiling> tilings(static_cast<size_t>(samples));
  parallel_for(tilings.size(), c.g.threads,
               [&](size_t k) { tilings[k] = sample_uniform_tiling(dom, updates, c.g.seed + k); });
  std::vector<std::vector<std::string>> rows;
  std::string text;
  for (size_t k = 0; k < tilings.size(); ++k) {
    for (const auto& l : tilings[k].lozenges)
      rows.push_back({num(int64_t(k)), num(int64_t(l.type)), num(l.anchor.x), num(l.anchor.t)});
    std::ostringstream os;
    write_tiling(os, tilings[k]);
    text += "# sample " + std::to_string(k) + "\n" + os.str();
  }
  c.out.csv("tilings", {"sample", "type", "x", "t"}, rows,
            {{"samples", samples}, {"updates", updates ? json(*updates) : json("default")}, {"seed", c.g.seed}});
  c.out.text("tilings.txt", text);
  return 0;
}

PathBoundary boundary_of(const json& j) {
  if (j.contains("hexagon") || !j.contains("entrance")) {
    const auto h = get_or(j, "hexagon", std::vector<int64_t>{2, 2, 2});
    if (h.size() != 3) config_error("hexagon needs [a, b, c]");
    return hexagon_paths(h[0], h[1], h[2]);
  }
  PathBoundary b;
  b.r = get_or<int64_t>(j, "r", 0);
  b.entrance = get_or(j, "entrance", std::vector<int64_t>{});
  for (int64_t x : get_or(j, "exit", std::vector<int64_t>{})) b.exit.push_back(x);
  b.left = get_or(j, "left", std::vector<int64_t>{});
  b.right = get_or(j, "right", std::vector<int64_t>{});
  if (b.exit.size() != b.entrance.size()) config_error("paths need one fixed exit per entrance");
  return b;
}

int cmd_sample_paths(Context& c) {
  const json& s = section(c.e, "paths");
  const PathBoundary data = boundary_of(s);
  const auto samples = get_or<int64_t>(s, "samples", 10);
  if (samples < 1) config_error("samples must be positive");
  std::optional<uint64_t> updates;
  if (s.contains("updates")) updates = get_or<uint64_t>(s, "updates", 0);
  std::vector<PathEnsemble> ens(static_cast<size_t>(samples));
  parallel_for(ens.size(), c.g.threads,
               [&](size_t k) { ens[k] = sample_uniform_paths(data, updates, c.g.seed + k); });
  std::vector<std::vector<std::string>> rows;
  for (size_t k = 0; k < ens.size(); ++k)
    for (const auto& p : ens[k].paths)
      for (const auto& seg : p.segments)
        for (size_t j = 0; j < seg.pos.size(); ++j)
          rows.push_back({num(int64_t(k)), num(p.label), num(seg.t0 + int64_t(j)), num(seg.pos[j])});
  c.out.csv("paths", {"sample", "label", "t", "position"}, rows,
            {{"samples", samples}, {"r", data.r}, {"seed", c.g.seed}});
  return 0;
}

int cmd_oracle_check(Context& c) {
  const json& s = section(c.e, "oracle");
  const auto cases = get_or<int64_t>(s, "cases", 12);
  const auto horizon = get_or<int64_t>(s, "horizon", 3);
  const auto max_particles = get_or<int64_t>(s, "max_particles", 3);
  if (cases < 1 || horizon < 1 || max_particles < 1) config_error("oracle sizes must be positive");
  struct Case {
    ParticleConfig d;
    double beta;
  };
  std::vector<Case> in{{make_config({0, 3}), 0.4}};
  std::mt19937_64 rng(c.g.seed);
  std::uniform_real_distribution<double> ub(0.1, 0.9);
  while (static_cast<int64_t>(in.size()) < cases) {
    const auto m = static_cast<size_t>(1 + rng() % static_cast<uint64_t>(max_particles));
    std::vector<int64_t> pos;
    int64_t p = 0;
    for (size_t i = 0; i < m; ++i) {
      pos.push_back(p);
      p += 1 + static_cast<int64_t>(rng() % 3);
    }
    in.push_back({make_config(pos), ub(rng)});
  }
  struct Row {
    std::string points;
    double det, enumeration;
  };
  std::vector<std::vector<Row>> res(in.size());
  parallel_for(in.size(), c.g.threads, [&](size_t k) {
    const Case& cs = in[k];
    std::vector<SpaceTimePoint> sites;
    for (int64_t t = 1; t <= horizon; ++t)
      for (int64_t x = cs.d.pos.front(); x <= cs.d.pos.back() + t; ++x) sites.push_back({t, x});
    auto label = [](const std::vector<SpaceTimePoint>& pts) {
      std::string sres;
      for (const auto& p : pts) sres += (sres.empty() ? "" : " ") + std::to_string(p.t) + ":" + std::to_string(p.x);
      return sres;
    };
    for (size_t i = 0; i < sites.size(); ++i)
      for (size_t j = i; j < sites.size(); ++j) {
        const std::vector<SpaceTimePoint> pts =
            i == j ? std::vector<SpaceTimePoint>{sites[i]} : std::vector<SpaceTimePoint>{sites[i], sites[j]};
        res[k].push_back({label(pts), correlation_determinant(pts, cs.d, cs.beta),
                          brute_force_correlations(cs.d, cs.beta, horizon, pts)});
      }
  });
  std::vector<std::vector<std::string>> rows;
  double worst = 0;
  for (size_t k = 0; k < in.size(); ++k) {
    std::string ds;
    for (int64_t x : in[k].d.pos) ds += (ds.empty() ? "" : " ") + std::to_string(x);
    for (const auto& r : res[k]) {
      const double diff = std::abs(r.det - r.enumeration);
      worst = std::max(worst, diff);
      rows.push_back({num(int64_t(k)), num(in[k].beta), ds, r.points, num(r.det), num(r.enumeration), num(diff)});
    }
  }
  c.out.csv("oracle_check", {"case", "beta", "d", "points", "det", "enumeration", "abs_diff"}, rows,
            {{"cases", cases}, {"horizon", horizon}, {"tolerance", c.g.tolerance}, {"seed", c.g.seed}});
  const bool ok = worst <= c.g.tolerance;
  c.summary = {{"checks", rows.size()}, {"max_abs_diff", worst}, {"tolerance", c.g.tolerance}, {"pass", ok}};
  std::cout << c.summary.dump() << "\n";
  return ok ? 0 : kExitChecksFailed;
}

// Empirical frozen window: for time rows t_c - rows .. t_c and sites within
// `window` of x_c, a site is frozen when its occupation never changes across
// samples; the window is the frozen run around the site nearest x_c.
int cmd_rigidity_scan(Context& c) {
  const json& s = section(c.e, "rigidity");
  if (!s.contains("cusp")) config_error("rigidity needs cusp = [x_c, t_c] (lattice units)");
  const auto cusp = get_or(s, "cusp", std::vector<double>{});
  if (cusp.size() != 2) config_error("cusp = [x_c, t_c]");
  const LatticeDomain dom = domain_of(s, c.e.base);
  const auto rows_n = get_or<int64_t>(s, "rows", 6);
  const auto window = get_or<int64_t>(s, "window", 8);
  const auto samples = get_or<int64_t>(s, "samples", 200);
  if (rows_n < 0 || window < 1 || samples < 1) config_error("rigidity sizes must be positive");
  HeightState st = make_height_state(dom, c.g.seed);
  run_height_chain(st, get_or<uint64_t>(s, "burn_in", default_burn_in(dom)));
  const auto thin = get_or<uint64_t>(s, "thin", 10 * std::max<uint64_t>(1, st.interior.size()));
  const auto xc = static_cast<int64_t>(std::llround(cusp[0])), tc = static_cast<int64_t>(std::llround(cusp[1]));
  const int64_t width = 2 * window + 1;
  std::vector<int64_t> occ(static_cast<size_t>((rows_n + 1) * width));
  for (int64_t k = 0; k < samples; ++k) {
    run_height_chain(st, thin);
    const PathEnsemble e = paths_from_height(st.h);
    for (const auto& p : e.paths)
      for (int64_t r = 0; r <= rows_n; ++r)
        if (const auto x = p.at(tc - r); x && std::abs(*x - xc) <= window)
          ++occ[static_cast<size_t>(r * width + (*x - xc + window))];
  }
  std::vector<std::vector<std::string>> occ_rows, win_rows;
  for (int64_t r = 0; r <= rows_n; ++r) {
    auto frozen = [&](int64_t j) {
      const int64_t v = occ[static_cast<size_t>(r * width + j)];
      return v == 0 || v == samples;
    };
    for (int64_t j = 0; j < width; ++j)
      occ_rows.push_back({num(tc - r), num(xc - window + j),
                          num(double(occ[static_cast<size_t>(r * width + j)]) / double(samples))});
    int64_t lo = window, hi = window - 1;
    if (frozen(window)) {
      lo = hi = window;
      while (lo > 0 && frozen(lo - 1)) --lo;
      while (hi + 1 < width && frozen(hi + 1)) ++hi;
    }
    win_rows.push_back({num(tc - r), num(r), num(xc - window + lo), num(xc - window + hi), num(hi - lo + 1)});
  }
  const json params = {{"cusp", cusp}, {"rows", rows_n}, {"window", window}, {"samples", samples}, {"thin", thin},
                       {"seed", c.g.seed}};
  c.out.csv("occupation", {"t", "x", "fraction"}, occ_rows, params);
  c.out.csv("frozen_window", {"t", "tc_minus_t", "frozen_lo", "frozen_hi", "width"}, win_rows, params);
  return 0;
}

int exit_code_for(Errc e) { return kExitModuleBase + static_cast<int>(e); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pk: Pearcey-universality experiments for Bernoulli walks and lozenge tilings"};
  app.require_subcommand(1);
  Globals g;
  g.threads = std::max(1u, std::thread::hardware_concurrency());
  const char* env_out = std::getenv("PK_OUTPUT_DIR");
  g.out_dir = env_out && *env_out ? env_out : "pk_out";
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "check / quadrature tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("-o,--out", g.out_dir, "output directory (default $PK_OUTPUT_DIR or ./pk_out)");
  app.set_version_flag("--version", PK_VERSION);

  using Handler = int (*)(Context&);
  const std::vector<std::tuple<std::string, std::string, Handler>> subs = {
      {"cusp-solve", "solve for the cusp and Pearcey parameters; prints JSON", cmd_cusp_solve},
      {"simulate-nbrw", "simulate NBRW trajectories from quantile initial data", cmd_simulate_nbrw},
      {"kernel-compare", "rescaled K^Bernoulli against K^Pearcey", cmd_kernel_compare},
      {"pearcey-eval", "evaluate the extended Pearcey kernel on a grid", cmd_pearcey_eval},
      {"gap-prob", "Pearcey Fredholm gap probabilities", cmd_gap_prob},
      {"sample-tiling", "uniform lozenge tilings by height-flip Glauber dynamics", cmd_sample_tiling},
      {"sample-paths", "uniform non-intersecting Bernoulli path ensembles", cmd_sample_paths},
      {"oracle-check", "determinantal formula against enumeration on tiny systems", cmd_oracle_check},
      {"rigidity-scan", "empirical frozen window near a cusp estimate", cmd_rigidity_scan},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, desc, h] : subs) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("config", g.config_path, "experiment config (JSON) or density config");
    handlers[sc] = h;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  const std::string sub = chosen->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  json manifest = {{"tool", "pk"}, {"version", PK_VERSION}, {"subcommand", sub}, {"seed", g.seed},
                   {"threads", g.threads}, {"tolerance", g.tolerance}, {"config", g.config_path}};
  int rc = 0;
  std::unique_ptr<Output> out;
  try {
    out = std::make_unique<Output>(g.out_dir, sub);
    Context ctx{g, load_experiment(g.config_path), *out};
    manifest["config_hash"] = "sha256:" + sha256_hex(sub + "\n" + ctx.e.raw);
    rc = handlers.at(chosen)(ctx);
    manifest["summary"] = ctx.summary;
    manifest["status"] = rc == 0 ? "ok" : "checks_failed";
  } catch (const Error& e) {
    rc = exit_code_for(e.code());
    manifest["status"] = "error";
    manifest["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
    std::cerr << "pk: " << errc_name(e.code()) << ": " << e.what() << "\n";
  } catch (const IoError& e) {
    rc = kExitIo;
    manifest["status"] = "error";
    manifest["error"] = {{"code", "IoError"}, {"message", e.what()}};
    std::cerr << "pk: " << e.what() << "\n";
  } catch (const std::exception& e) {
    rc = kExitInternal;
    manifest["status"] = "error";
    manifest["error"] = {{"code", "Internal"}, {"message", e.what()}};
    std::cerr << "pk: internal error: " << e.what() << "\n";
  }
  manifest["exit_code"] = rc;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["outputs"] = out ? json(out->checksums()) : json::object();
  if (out) {
    std::ofstream os(out->dir() / "manifest.json");
    os << manifest.dump(2) << "\n";
    if (!os && rc == 0) rc = kExitIo;
  }
  return rc;
}
