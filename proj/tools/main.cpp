#include "report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  using fpaut::cli::JobConfig;
  JobConfig cfg;
  CLI::App app{"fpaut: automorphisms of free products of free abelian and free groups"};
  app.set_version_flag("--version", std::string(fpaut::cli::kVersion));
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"classify", "growth of the orbit of --element"},
      {"atoroidal", "search for periodic conjugacy classes"},
      {"twins", "search for twinned factor conjugates"},
      {"flare", "empirical flare certificate"},
      {"traintrack", "gates and the train track property of the standard map"},
      {"constants", "Lipschitz, cancellation and critical constants"},
      {"torus-ab", "abelianization of the mapping torus"},
      {"conjugacy", "bounded conjugacy test of --aut and --aut2 in Out"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->callback([&cfg, name = c.name] { cfg.command = name; });
    sub->add_option("--aut", cfg.aut, "automorphism file (JSON)")->required();
    sub->add_option("--out", cfg.out, "write the report here instead of stdout");
    sub->add_option("--cache-dir", cfg.cache_dir, "result cache directory (FPAUT_CACHE overrides)");
    sub->add_flag("--strict", cfg.strict, "exit 3 on undecided verdicts");
    const std::string name = c.name;
    if (name == "classify") {
      sub->add_option("--element", cfg.element, "word in the group")->required();
      sub->add_option("--max-iter", cfg.max_iter, "orbit length n_max")->capture_default_str();
    }
    if (name == "atoroidal" || name == "flare") {
      sub->add_option("--max-len", cfg.max_len, "syllable length bound L")->capture_default_str();
      sub->add_option("--max-l1", cfg.max_l1, "L1 bound per factor syllable (default: L)");
    }
    if (name == "atoroidal" || name == "twins") {
      sub->add_option("--max-exp", cfg.max_exp, "exponent bound")->capture_default_str();
      sub->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
      sub->add_option("--max-candidates", cfg.max_candidates, "stop with undecided after this many candidates");
    }
    if (name == "twins") {
      sub->add_option("--conj-len", cfg.conj_len, "coset representative length bound")->capture_default_str();
      sub->add_option("--max-l1", cfg.max_l1, "L1 bound per factor syllable (default: max(conj-len, 1))");
    }
    if (name == "flare") {
      sub->add_option("--min-len", cfg.min_len, "short-word cutoff M")->capture_default_str();
      sub->add_option("--max-iter", cfg.max_iter, "largest exponent N tried")->default_str("6");
      sub->add_option("--lambda-min", cfg.lambda_min, "lambda > 1, decimal or p/q")->capture_default_str();
    }
    if (name == "traintrack" || name == "constants")
      sub->add_option("--depth", cfg.depth, "gate iteration depth (default: 2 * (factors + free rank) + 4)");
    if (name == "conjugacy") {
      sub->add_option("--aut2", cfg.aut2, "second automorphism file")->required();
      sub->add_option("--conj-len", cfg.conj_len, "partial conjugation length bound")->capture_default_str();
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  // Classify uses a longer orbit by default than flare.
  if (cfg.command == "flare" && app.get_subcommand("flare")->count("--max-iter") == 0) cfg.max_iter = 6;

  const auto result = fpaut::cli::run(cfg);
  if (result.exit_code == 2 && result.report.is_null()) {
    std::cerr << "fpaut: " << result.error << "\n";
    return 2;
  }
  const std::string text = fpaut::cli::render_report(result.report);
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << "fpaut: cannot write " << cfg.out << "\n";
      return 2;
    }
    out << text;
  }
  return result.exit_code;
}
