#include "report.hpp"

#include <fpaut/dynamics.hpp>
#include <fpaut/graph_map.hpp>
#include <fpaut/mapping_torus.hpp>
#include <fpaut/word_io.hpp>

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fpaut::cli {

using nlohmann::json;

namespace {

// --- serialization helpers ---

json integers(std::span<const Integer> v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

json matrix(const IntegerMatrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(integers(m.row(r)));
  return a;
}

std::string rational(const Rational& q) {
  const Integer n = numerator(q), d = denominator(q);
  return d == 1 ? n.str() : n.str() + "/" + d.str();
}

json growth_rate(const GrowthRate& g) {
  return {{"value", g.value}, {"lower", g.lower}, {"upper", g.upper}};
}

/// The word grammar, with "1" for the identity.
std::string text(const Word& w) { return w.empty() ? "1" : render(w); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// An error in the command's bounds or inputs.
void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

json search_stats_timing(const SearchStats& s) { return {{"search_seconds", s.seconds}}; }

const char* stats_verdict(const SearchStats& s) { return to_string(s.verdict); }

// --- commands: each fills result, bounds and timing, and returns the exit code before --strict ---

struct Output {
  json result = json::object();
  json bounds = json::object();
  json timing = json::object();
  bool failure = false;    // exit 1
  bool undecided = false;  // exit 3 under --strict
};

Output classify(const JobConfig& cfg, const Automorphism& phi) {
  require(!cfg.element.empty(), "classify needs --element");
  require(cfg.max_iter >= 7, "classify needs --max-iter >= 7");
  const Word g = parse_word(cfg.element, phi.presentation_ptr());
  Output o;
  o.bounds = {{"max_iter", cfg.max_iter}};
  const OrbitProfile p = orbit_lengths(phi, g, cfg.max_iter);
  json masses = json::array();
  for (const auto& m : p.factor_masses) masses.push_back(m.str());
  auto verdict_json = [&](const GrowthVerdict& v) {
    json j = {{"kind", to_string(v.kind)}, {"heuristic", v.heuristic}};
    if (v.kind == GrowthVerdict::Kind::polynomial) j["degree"] = v.degree;
    if (v.kind == GrowthVerdict::Kind::exponential) j["rate"] = v.rate;
    j["fit"] = {{"log_slope", v.log_slope}, {"log_r2", v.log_r2}, {"loglog_slope", v.loglog_slope}, {"loglog_r2", v.loglog_r2}};
    return j;
  };
  o.result = {{"element", text(g)},
              {"cyclic_lengths", p.cyclic_lengths},
              {"free_lengths", p.free_lengths},
              {"factor_masses", masses},
              {"length_growth", verdict_json(classify_growth(p.cyclic_lengths, p.class_period))}};
  if (phi.presentation().factor_count() > 0)
    o.result["mass_growth"] = verdict_json(classify_growth(p.factor_masses, p.class_period));
  if (p.class_period) o.result["class_period"] = {{"preperiod", *p.class_preperiod}, {"period", *p.class_period}};
  return o;
}

SearchOptions search_options(const JobConfig& cfg) {
  SearchOptions opt;
  opt.jobs = cfg.jobs;
  opt.max_candidates = cfg.max_candidates;
  return opt;
}

Output atoroidal(const JobConfig& cfg, const Automorphism& phi) {
  require(cfg.max_len >= 1 && cfg.max_exp >= 1, "atoroidal needs --max-len, --max-exp >= 1");
  const int l1 = cfg.max_l1 > 0 ? cfg.max_l1 : cfg.max_len;
  const AtoroidalReport r = atoroidal_search(phi, cfg.max_len, cfg.max_exp, l1, search_options(cfg));
  Output o;
  o.bounds = {{"max_len", r.max_len}, {"max_exp", r.max_exp}, {"max_l1", r.max_l1}, {"max_candidates", cfg.max_candidates}};
  json ws = json::array();
  for (const auto& w : r.witnesses)
    ws.push_back({{"element", text(w.element)}, {"exponent", w.exponent}, {"conjugator", text(w.conjugator)}});
  o.result = {{"verdict", stats_verdict(r.stats)}, {"candidates", r.stats.candidates}, {"witnesses", ws}};
  if (r.stats.verdict == SearchStats::Verdict::exhausted) o.result["meaning"] = "atoroidal up to bounds";
  o.timing = search_stats_timing(r.stats);
  o.failure = r.stats.verdict == SearchStats::Verdict::witness;
  o.undecided = r.stats.verdict == SearchStats::Verdict::undecided;
  return o;
}

Output twins(const JobConfig& cfg, const Automorphism& phi) {
  require(cfg.max_exp >= 1 && cfg.conj_len >= 0, "twins needs --max-exp >= 1, --conj-len >= 0");
  const int l1 = cfg.max_l1 > 0 ? cfg.max_l1 : std::max(cfg.conj_len, 1);
  const TwinReport r = twin_search(phi, cfg.max_exp, cfg.conj_len, l1, search_options(cfg));
  Output o;
  o.bounds = {{"max_exp", r.max_exp}, {"conj_len", r.max_len}, {"max_l1", r.max_l1}, {"max_candidates", cfg.max_candidates}};
  json ws = json::array();
  for (const auto& t : r.witnesses)
    ws.push_back({{"exponent", t.exponent}, {"u", text(t.u)}, {"i", t.i + 1}, {"v", text(t.v)}, {"j", t.j + 1}, {"g", text(t.g)}});
  o.result = {{"verdict", stats_verdict(r.stats)}, {"candidates", r.stats.candidates}, {"witnesses", ws}};
  o.timing = search_stats_timing(r.stats);
  o.failure = r.stats.verdict == SearchStats::Verdict::witness;
  o.undecided = r.stats.verdict == SearchStats::Verdict::undecided;
  return o;
}

Output flare(const JobConfig& cfg, const Automorphism& phi) {
  const Rational lambda = parse_rational(cfg.lambda_min);
  require(lambda > 1, "--lambda-min must exceed 1");
  require(cfg.min_len >= 1 && cfg.max_len >= cfg.min_len && cfg.max_iter >= 1, "flare needs 1 <= --min-len <= --max-len, --max-iter >= 1");
  const int l1 = cfg.max_l1 > 0 ? cfg.max_l1 : cfg.max_len;
  const FlareReport r = flare_certify(phi, cfg.min_len, cfg.max_len, cfg.max_iter, lambda, l1);
  Output o;
  o.bounds = {{"min_len", r.min_len}, {"max_len", r.max_len}, {"max_l1", r.max_l1}, {"max_iter", r.n_max}, {"lambda_min", rational(lambda)}};
  json ex = json::array();
  for (const auto& f : r.counterexamples)
    ex.push_back({{"element", text(f.element)}, {"length", f.length}, {"forward", f.forward}, {"backward", f.backward}});
  o.result = {{"verdict", r.certified ? "certified" : "counterexamples"},
              {"evidence", "empirical: enumerated classes only, not a proof"},
              {"enumerated", r.enumerated},
              {"failure_count", r.failure_count},
              {"counterexamples", ex}};
  if (r.certified)
    o.result["certificate"] = {{"lambda", rational(r.lambda)}, {"N", r.exponent}, {"M", r.min_len}, {"L", r.max_len}};
  o.timing = {{"search_seconds", r.seconds}};
  o.failure = !r.certified;
  return o;
}

int gate_depth(const JobConfig& cfg, const GraphMap& m) {
  require(cfg.depth >= 0, "--depth must be positive");
  return cfg.depth > 0 ? cfg.depth : default_gate_depth(m.graph().presentation());
}

json train_track_json(const GraphMap& m, const TrainTrackReport& t) {
  json j = {{"verdict", to_string(t.verdict)}, {"depth", t.depth}};
  if (t.edge) {
    j["edge"] = m.graph().edge_name(*t.edge);
    j["image"] = render_path(m.graph(), m.edge_image(*t.edge));
    j["turn"] = *t.turn;
  }
  return j;
}

Output traintrack(const JobConfig& cfg, const Automorphism& phi) {
  const GraphMap m(phi);
  const int depth = gate_depth(cfg, m);
  const auto t0 = std::chrono::steady_clock::now();
  const GateStructure gates = gate_structure(m, depth);
  const TrainTrackReport t = check_train_track(m, depth);
  const IntegerMatrix tm = transition_matrix(m);
  Output o;
  o.bounds = {{"depth", depth}};
  json images = json::object();
  for (int e = 0; e < m.graph().edge_count(); ++e) images[m.graph().edge_name(e)] = render_path(m.graph(), m.edge_image(e));
  json gate_list = json::array();
  for (const auto& g : gates.free_gates()) {
    json names = json::array();
    for (int c : g) names.push_back(m.graph().direction_name(c));
    gate_list.push_back(names);
  }
  o.result = {{"edge_images", images},
              {"transition_matrix", matrix(tm)},
              {"irreducible", is_irreducible_matrix(tm)},
              {"gates_at_base", gate_list},
              {"gate_count_at_base", gates.free_gate_count()},
              {"gates_stable", gates.stable},
              {"train_track", train_track_json(m, t)}};
  if (!tm.is_zero()) o.result["growth_rate"] = growth_rate(pf_growth_rate(tm));
  o.timing = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  o.failure = t.verdict == TrainTrackReport::Verdict::violated;
  o.undecided = t.verdict == TrainTrackReport::Verdict::undecided;
  return o;
}

Output constants(const JobConfig& cfg, const Automorphism& phi) {
  const GraphMap m(phi);
  const int depth = gate_depth(cfg, m);
  const auto t0 = std::chrono::steady_clock::now();
  const ConstantsReport c = compute_constants(m, depth);
  Output o;
  o.bounds = {{"depth", depth}, {"cancellation_horizon", c.cancellation_horizon}};
  o.result = {{"lambda", growth_rate(c.lambda)},
              {"lipschitz", rational(c.lipschitz)},
              {"bounded_cancellation", rational(c.bounded_cancellation)},
              {"prefix_cancellation", rational(c.prefix_cancellation)},
              {"cancellation_upper_bound", rational(c.cancellation_upper_bound)},
              {"transversality", rational(c.transversality)},
              {"irreducible", c.irreducible},
              {"train_track", train_track_json(m, c.train_track)}};
  if (c.critical_constant) o.result["critical_constant"] = *c.critical_constant;
  o.timing = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return o;
}

Output torus_ab(const JobConfig&, const Automorphism& phi) {
  const AbelianizationReport r = mapping_torus_abelianization(phi);
  Output o;
  IntVector torsion;
  for (const auto& d : r.invariant_factors)
    if (d != 0) torsion.push_back(d);
  json factors = json::array();
  for (const auto& b : r.factor_images) factors.push_back(matrix(b));
  o.result = {{"invariant_factors", integers(torsion)},
              {"free_rank", r.free_rank},
              {"group", r.group_string()},
              {"action", matrix(r.action)},
              {"factor_images", factors},
              {"t_image", integers(r.t_image)}};
  return o;
}

Output conjugacy(const JobConfig& cfg, const Automorphism& phi1, const Automorphism& phi2) {
  require(cfg.conj_len >= 0, "--conj-len must be nonnegative");
  ConjugacyOptions opt;
  opt.conj_len = cfg.conj_len;
  const auto t0 = std::chrono::steady_clock::now();
  const ConjugacyReport r = conjugacy_pipeline(phi1, phi2, opt);
  Output o;
  o.bounds = {{"conj_len", cfg.conj_len}, {"intertwiner_bound", opt.intertwiner_bound}};
  o.result = {{"verdict", to_string(r.verdict)}, {"candidates", r.candidates}, {"warnings", r.warnings}};
  if (r.verdict == ConjugacyReport::Verdict::distinguished)
    o.result["invariant"] = {{"name", r.invariant}, {"aut", r.value1}, {"aut2", r.value2}};
  if (r.witness) o.result["witness"] = {{"chi", automorphism_to_json(r.witness->chi)}, {"inner", text(r.witness->inner)}};
  o.timing = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  o.undecided = r.verdict == ConjugacyReport::Verdict::undecided;
  return o;
}

std::string cache_directory(const JobConfig& cfg) {
  if (const char* env = std::getenv("FPAUT_CACHE"); env && *env) return env;
  return cfg.cache_dir;
}

}  // namespace

json automorphism_to_json(const Automorphism& phi) {
  const Presentation& p = phi.presentation();
  json images = json::object(), inverse = json::object();
  for (int g = 0; g < p.generator_count(); ++g) {
    images[p.generator_name(g)] = text(phi.images()[static_cast<std::size_t>(g)]);
    inverse[p.generator_name(g)] = text(phi.inverse_images()[static_cast<std::size_t>(g)]);
  }
  return {{"group", {{"abelian_factors", p.abelian_ranks()}, {"free_rank", p.free_rank()}}},
          {"images", images},
          {"inverse_images", inverse}};
}

Automorphism automorphism_from_json(const json& j) {
  try {
    const json& group = j.at("group");
    const auto ranks = group.at("abelian_factors").get<std::vector<int>>();
    const int k = group.at("free_rank").get<int>();
    for (int r : ranks) require(r >= 1, "abelian factor ranks must be positive");
    require(k >= 0, "free_rank must be nonnegative");
    const PresentationPtr pres = make_presentation(ranks, k);
    std::vector<std::string> names;
    for (int g = 0; g < pres->generator_count(); ++g) names.push_back(pres->generator_name(g));
    auto table = [&](const char* key) {
      std::vector<Word> out;
      for (int g = 0; g < pres->generator_count(); ++g) out.push_back(generator_word(pres, g));
      if (!j.contains(key)) throw ConfigError(std::string("missing \"") + key + "\"");
      for (const auto& [name, text] : j.at(key).items()) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw IndexOutOfRange("unknown generator \"" + name + "\" in " + key);
        out[static_cast<std::size_t>(it - names.begin())] = parse_word(text.get<std::string>(), pres);
      }
      return out;
    };
    return Automorphism::validate(table("images"), table("inverse_images"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed automorphism: ") + e.what());
  }
}

Automorphism load_automorphism(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return automorphism_from_json(j);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return ss.str();
}

Rational parse_rational(const std::string& text) {
  const std::size_t slash = text.find('/'), dot = text.find('.');
  try {
    if (slash != std::string::npos) {
      const Integer d(text.substr(slash + 1));
      require(d != 0, "zero denominator in " + text);
      return Rational(Integer(text.substr(0, slash)), d);
    }
    if (dot != std::string::npos) {
      const std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
      require(!frac.empty() && frac.find_first_not_of("0123456789") == std::string::npos, "bad decimal " + text);
      Integer scale = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
      const bool negative = !whole.empty() && whole[0] == '-';
      const Integer w = whole.empty() || whole == "-" ? Integer(0) : Integer(whole);
      const Integer f(frac);
      return Rational(w * scale + (negative ? Integer(-f) : f), scale);
    }
    return Rational(Integer(text));
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw ConfigError("not a number: " + text);
  }
}

std::string render_report(const json& report) { return report.dump(2) + "\n"; }

RunResult run(const JobConfig& cfg) {
  RunResult rr;
  try {
    static const std::vector<std::string> commands{"classify", "atoroidal", "twins", "flare", "traintrack", "constants", "torus-ab", "conjugacy"};
    require(std::find(commands.begin(), commands.end(), cfg.command) != commands.end(), "unknown command " + cfg.command);
    require(!cfg.aut.empty(), "--aut is required");
    require(cfg.jobs >= 1, "--jobs must be positive");
    require(cfg.command != "conjugacy" || !cfg.aut2.empty(), "conjugacy needs --aut2");

    json inputs = json::object();
    const std::string text1 = read_file(cfg.aut);
    inputs["aut"] = {{"path", cfg.aut}, {"sha256", sha256_hex(text1)}};
    std::string text2;
    if (cfg.command == "conjugacy") {
      text2 = read_file(cfg.aut2);
      inputs["aut2"] = {{"path", cfg.aut2}, {"sha256", sha256_hex(text2)}};
    }
    if (!cfg.element.empty()) inputs["element"] = cfg.element;
    const Automorphism phi = load_automorphism(cfg.aut);

    Output o;
    // The bounds are part of the cache key, so compute the full output lazily.
    auto compute = [&]() {
      if (cfg.command == "classify") return classify(cfg, phi);
      if (cfg.command == "atoroidal") return atoroidal(cfg, phi);
      if (cfg.command == "twins") return twins(cfg, phi);
      if (cfg.command == "flare") return flare(cfg, phi);
      if (cfg.command == "traintrack") return traintrack(cfg, phi);
      if (cfg.command == "constants") return constants(cfg, phi);
      if (cfg.command == "torus-ab") return torus_ab(cfg, phi);
      return conjugacy(cfg, phi, load_automorphism(cfg.aut2));
    };

    // Cache: keyed by version, command, input hashes and every bound-bearing option.
    const std::string dir = cache_directory(cfg);
    const json key_material = {{"version", kVersion}, {"command", cfg.command}, {"inputs", inputs},
                               {"options", {{"max_len", cfg.max_len}, {"max_exp", cfg.max_exp}, {"max_iter", cfg.max_iter},
                                            {"depth", cfg.depth}, {"lambda_min", cfg.lambda_min}, {"min_len", cfg.min_len},
                                            {"conj_len", cfg.conj_len}, {"max_l1", cfg.max_l1},
                                            {"max_candidates", cfg.max_candidates}}}};
    const std::string key = sha256_hex(key_material.dump());
    std::filesystem::path cache_file;
    bool hit = false;
    if (!dir.empty()) {
      cache_file = std::filesystem::path(dir) / (key + ".json");
      if (std::filesystem::exists(cache_file)) {
        try {
          const json c = json::parse(read_file(cache_file.string()));
          o.result = c.at("result");
          o.bounds = c.at("bounds");
          o.failure = c.at("failure").get<bool>();
          o.undecided = c.at("undecided").get<bool>();
          hit = true;
        } catch (const std::exception&) {
          hit = false;  // unreadable entry: recompute and overwrite
        }
      }
    }
    if (!hit) {
      o = compute();
      if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        const json c = {{"result", o.result}, {"bounds", o.bounds}, {"failure", o.failure}, {"undecided", o.undecided}};
        const auto tmp = cache_file.string() + ".tmp";
        std::ofstream(tmp) << c.dump();
        std::filesystem::rename(tmp, cache_file);
      }
    }

    json report = {{"schema", kSchema},
                   {"tool", "fpaut"},
                   {"version", kVersion},
                   {"command", cfg.command},
                   {"inputs", inputs},
                   {"bounds", o.bounds},
                   {"result", o.result}};
    report["report_sha256"] = sha256_hex(report.dump());
    json timing = hit ? json{{"cached", true}} : o.timing;
    timing["cached"] = hit;
    report["timing"] = timing;

    rr.report = report;
    rr.cached = hit;
    rr.exit_code = o.failure ? 1 : (o.undecided && cfg.strict ? 3 : 0);
  } catch (const Error& e) {
    rr.exit_code = 2;
    rr.error = e.what();
    rr.report = json();
  } catch (const std::filesystem::filesystem_error& e) {
    rr.exit_code = 2;
    rr.error = e.what();
    rr.report = json();
  }
  return rr;
}

}  // namespace fpaut::cli
