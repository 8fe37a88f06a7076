#include "report.hpp"

#include <fpaut/word_io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

#include "support.hpp"

using namespace fpaut;
using namespace fpaut::testing;
using fpaut::cli::JobConfig;
using nlohmann::json;

namespace {

std::string data(const char* name) { return std::string(FPAUT_DATA_DIR) + "/" + name; }

JobConfig job(const std::string& command, const char* aut) {
  JobConfig cfg;
  cfg.command = command;
  cfg.aut = data(aut);
  return cfg;
}

json without_timing(json report) {
  report.erase("timing");
  return report;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fpaut_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args, const std::string& out_file = "/dev/null") {
  const std::string cmd = std::string(FPAUT_CLI_PATH) + " " + args + " > " + out_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseWord, Examples) {
  const auto pres = make_presentation({2}, 1);
  EXPECT_TRUE(parse_word("a1.1 a1.1^-1", pres).empty());
  const Word w = parse_word("a1.1^2 x1^-1", pres);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], Syllable::factor(0, {2, 0}));
  EXPECT_EQ(w[1], Syllable::free(0, -1));
  EXPECT_THROW(parse_word("a1.3", pres), IndexOutOfRange);
  try {
    parse_word("a1.1 y2", pres);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(ParseWord, RoundTrip) {
  std::mt19937 rng(1);
  for (const auto& pres : {make_presentation({2, 3}, 2), make_presentation({}, 3), make_presentation({1, 1, 4}, 0)}) {
    for (int trial = 0; trial < 300; ++trial) {
      const Word w = random_word(pres, rng, 6, 5);
      EXPECT_EQ(parse_word(render(w), pres), w);
    }
  }
}

TEST(AutomorphismFile, RoundTrip) {
  for (const auto& phi : {fibonacci(), toral_twist(), intro_z2z3(), mixed_z2z2f1()})
    EXPECT_EQ(cli::automorphism_from_json(cli::automorphism_to_json(phi)), phi);
  EXPECT_EQ(cli::load_automorphism(data("fib.json")), fibonacci());
  EXPECT_EQ(cli::load_automorphism(data("intro_z2z3.json")), intro_z2z3());
}

TEST(AutomorphismFile, Errors) {
  EXPECT_THROW(cli::automorphism_from_json(json::parse(R"({"images": {}})")), ConfigError);
  const json bad_inverse = {{"group", {{"abelian_factors", json::array()}, {"free_rank", 2}}},
                            {"images", {{"x1", "x1 x2"}}},
                            {"inverse_images", {{"x1", "x1"}}}};
  EXPECT_THROW(cli::automorphism_from_json(bad_inverse), NotAnAutomorphism);
  const json unknown = {{"group", {{"abelian_factors", {2}}, {"free_rank", 0}}},
                        {"images", {{"a1.3", "a1.1"}}},
                        {"inverse_images", json::object()}};
  EXPECT_THROW(cli::automorphism_from_json(unknown), IndexOutOfRange);
}

TEST(Helpers, Sha256AndRationals) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(cli::parse_rational("1.5"), Rational(3, 2));
  EXPECT_EQ(cli::parse_rational("3/2"), Rational(3, 2));
  EXPECT_EQ(cli::parse_rational("2"), Rational(2));
  EXPECT_EQ(cli::parse_rational("-0.25"), Rational(-1, 4));
  EXPECT_THROW(cli::parse_rational("1.x"), ConfigError);
  EXPECT_THROW(cli::parse_rational("abc"), ConfigError);
  EXPECT_THROW(cli::parse_rational("1/0"), ConfigError);
}

TEST(Run, AtoroidalFibonacci) {
  auto cfg = job("atoroidal", "fib.json");
  cfg.max_len = 6;
  cfg.max_exp = 4;
  const auto r = cli::run(cfg);
  EXPECT_EQ(r.exit_code, 1);
  const json& res = r.report["result"];
  EXPECT_EQ(res["verdict"], "witness");
  const auto fib = fibonacci();
  const Word g = parse_word(res["witnesses"][0]["element"].get<std::string>(), fib.presentation_ptr());
  const Word commutator = parse_word("x1 x2 x1^-1 x2^-1", fib.presentation_ptr());
  EXPECT_TRUE(conjugate_test(g, commutator) || conjugate_test(g, invert(commutator)));
  EXPECT_EQ(res["witnesses"][0]["exponent"], 2);
  EXPECT_EQ(r.report["schema"], 1);
  EXPECT_EQ(r.report["inputs"]["aut"]["sha256"].get<std::string>().size(), 64u);
}

TEST(Run, TorusAbelianizationFibonacci) {
  const auto r = cli::run(job("torus-ab", "fib.json"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["invariant_factors"], json::array());
  EXPECT_EQ(r.report["result"]["free_rank"], 1);
}

TEST(Run, TwinsIntroduction) {
  auto cfg = job("twins", "intro_z2z3.json");
  cfg.max_exp = 2;
  cfg.conj_len = 2;
  const auto r = cli::run(cfg);
  EXPECT_EQ(r.exit_code, 1);
  const json& w = r.report["result"]["witnesses"][0];
  EXPECT_EQ(w["i"], 1);
  EXPECT_EQ(w["j"], 2);
  EXPECT_EQ(w["g"], "1");
  EXPECT_EQ(w["exponent"], 1);
  // Witnesses are replayable in the word grammar.
  EXPECT_TRUE(parse_word(w["g"].get<std::string>(), intro_z2z3().presentation_ptr()).empty());
}

TEST(Run, OtherCommands) {
  auto tt = cli::run(job("traintrack", "fib.json"));
  EXPECT_EQ(tt.exit_code, 0);
  EXPECT_EQ(tt.report["result"]["train_track"]["verdict"], "holds");
  EXPECT_EQ(tt.report["result"]["gate_count_at_base"], 3);

  EXPECT_EQ(cli::run(job("traintrack", "toral_twist.json")).exit_code, 1);

  auto cfg = job("constants", "fib.json");
  const auto c = cli::run(cfg);
  EXPECT_EQ(c.exit_code, 0);
  EXPECT_EQ(c.report["result"]["lipschitz"], "2");

  cfg = job("classify", "fib.json");
  cfg.element = "x1";
  const auto cl = cli::run(cfg);
  EXPECT_EQ(cl.exit_code, 0);
  EXPECT_EQ(cl.report["result"]["length_growth"]["kind"], "exponential");

  cfg = job("flare", "mixed_z2z2f1.json");
  cfg.max_len = 3;
  cfg.max_l1 = 1;
  cfg.max_iter = 4;
  const auto fl = cli::run(cfg);
  EXPECT_EQ(fl.exit_code, 0);
  EXPECT_EQ(fl.report["result"]["verdict"], "certified");
  cfg.aut = data("intro_z2z3.json");
  EXPECT_EQ(cli::run(cfg).exit_code, 1);

  cfg = job("conjugacy", "anosov.json");
  cfg.aut2 = data("anosov_torsion2.json");
  const auto d = cli::run(cfg);
  EXPECT_EQ(d.exit_code, 0);
  EXPECT_EQ(d.report["result"]["verdict"], "distinguished");
  cfg = job("conjugacy", "toral_twist.json");
  cfg.aut2 = data("toral_twist_inner.json");
  const auto cj = cli::run(cfg);
  EXPECT_EQ(cj.report["result"]["verdict"], "conjugate");
  const auto chi = cli::automorphism_from_json(cj.report["result"]["witness"]["chi"]);
  const Word inner = parse_word(cj.report["result"]["witness"]["inner"].get<std::string>(), chi.presentation_ptr());
  const auto phi1 = cli::load_automorphism(data("toral_twist.json")), phi2 = cli::load_automorphism(data("toral_twist_inner.json"));
  EXPECT_EQ(compose(compose(chi, phi1), chi.inverse()), compose(ad(inner), phi2));
}

TEST(Run, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli::run(job("atoroidal", "missing.json")).exit_code, 2);
  EXPECT_EQ(cli::run(job("nonsense", "fib.json")).exit_code, 2);
  auto cfg = job("flare", "fib.json");
  cfg.lambda_min = "1";
  EXPECT_EQ(cli::run(cfg).exit_code, 2);
  cfg = job("classify", "fib.json");
  cfg.element = "x3";
  const auto r = cli::run(cfg);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.error.empty());
  cfg = job("atoroidal", "fib.json");
  cfg.max_len = 0;
  EXPECT_EQ(cli::run(cfg).exit_code, 2);
}

TEST(Run, StrictTurnsUndecidedIntoThree) {
  auto cfg = job("atoroidal", "intro_z2z3.json");
  cfg.max_l1 = 1;
  cfg.max_candidates = 5;
  const auto lax = cli::run(cfg);
  EXPECT_EQ(lax.report["result"]["verdict"], "undecided");
  EXPECT_EQ(lax.exit_code, 0);
  cfg.strict = true;
  EXPECT_EQ(cli::run(cfg).exit_code, 3);
}

TEST(Run, DeterministicReports) {
  auto cfg = job("atoroidal", "mixed_z2z2f1.json");
  cfg.max_len = 3;
  cfg.max_l1 = 1;
  const auto a = cli::run(cfg), b = cli::run(cfg);
  EXPECT_EQ(cli::render_report(without_timing(a.report)), cli::render_report(without_timing(b.report)));
  EXPECT_EQ(a.report["report_sha256"], b.report["report_sha256"]);
  cfg.jobs = 3;
  const auto c = cli::run(cfg);
  EXPECT_EQ(without_timing(a.report), without_timing(c.report));
}

TEST(Run, CacheReturnsIdenticalVerdicts) {
  const auto dir = fresh_dir("cache");
  auto cfg = job("twins", "intro_z2z3.json");
  cfg.cache_dir = dir.string();
  const auto first = cli::run(cfg), second = cli::run(cfg);
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.report["result"], second.report["result"]);
  EXPECT_EQ(first.exit_code, second.exit_code);
  EXPECT_EQ(without_timing(first.report), without_timing(second.report));
  // Different bounds are a different key.
  cfg.max_exp = 1;
  EXPECT_FALSE(cli::run(cfg).cached);

  const auto env_dir = fresh_dir("env");
  ::setenv("FPAUT_CACHE", env_dir.string().c_str(), 1);
  const auto e1 = cli::run(cfg);
  ::unsetenv("FPAUT_CACHE");
  EXPECT_FALSE(e1.cached);
  EXPECT_FALSE(std::filesystem::is_empty(env_dir));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(env_dir);
}

TEST(Binary, ExitCodesAndOutput) {
  const std::string d = FPAUT_DATA_DIR;
  EXPECT_EQ(run_cli("atoroidal --aut " + d + "/fib.json --max-len 6 --max-exp 4"), 1);
  EXPECT_EQ(run_cli("torus-ab --aut " + d + "/fib.json"), 0);
  EXPECT_EQ(run_cli("twins --aut " + d + "/intro_z2z3.json --max-exp 2 --conj-len 2"), 1);
  EXPECT_EQ(run_cli("atoroidal --aut " + d + "/fib.json --max-len x"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("atoroidal --aut " + d + "/intro_z2z3.json --max-l1 1 --max-candidates 3 --strict"), 3);

  const auto dir = fresh_dir("out");
  std::filesystem::create_directories(dir);
  const auto out = (dir / "report.json").string();
  EXPECT_EQ(run_cli("torus-ab --aut " + d + "/toral_twist.json --out " + out), 0);
  std::ifstream in(out);
  const json report = json::parse(in);
  EXPECT_EQ(report["result"]["free_rank"], 5);
  std::filesystem::remove_all(dir);
}
