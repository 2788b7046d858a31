// Command-line front end: run one method on a deck or built-in case, compare
// all methods on matched timesteps, or emit decks for inspection.

#include <omp.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "addm/cases.hpp"
#include "addm/deck.hpp"
#include "addm/runner.hpp"

namespace {

struct CommonArgs {
  std::string deck_path;
  std::string case_name;
  std::string out_dir;
  std::string method;
  int workers = 0;
  unsigned long long seed = 0;
  bool have_seed = false;
  bool snapshots = false;
};

void add_source_options(CLI::App* cmd, CommonArgs& a) {
  auto* deck = cmd->add_option("--deck", a.deck_path, "deck file to run");
  auto* cas = cmd->add_option(
      "--case", a.case_name,
      "built-in case, e.g. case1-mini:small or case2-mini:tiny");
  deck->excludes(cas);
  cmd->add_option("--seed", a.seed, "permeability field seed (case2-mini)")
      ->each([&a](const std::string&) { a.have_seed = true; });
}

addm::Deck load_deck(const CommonArgs& a) {
  if (!a.deck_path.empty()) return addm::parse_deck_file(a.deck_path);
  if (!a.case_name.empty())
    return addm::builtin_case(a.case_name, a.have_seed ? a.seed : 12345ull);
  throw addm::ConfigError("give --deck or --case");
}

addm::RunOptions make_options(const CommonArgs& a) {
  addm::RunOptions opt;
  if (!a.method.empty()) opt.method = addm::method_from_string(a.method);
  opt.workers = a.workers;
  opt.out_dir = a.out_dir;
  opt.snapshots = a.snapshots;
  if (a.have_seed) opt.seed = a.seed;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_max_active_levels(1);
  CLI::App app{"two-phase flow simulator with adaptive subdomain coupling"};
  app.require_subcommand(1);

  CommonArgs run_args, cmp_args, gen_args, echo_args;

  CLI::App* run = app.add_subcommand("run", "run one method");
  add_source_options(run, run_args);
  run->add_option("--method", run_args.method,
                  "FIM, CDDM, ADDM01, ADDM02 or ADDM03 (overrides the deck)");
  run->add_option("--out", run_args.out_dir, "output directory");
  run->add_option("--workers", run_args.workers, "OpenMP thread count");
  run->add_flag("--snapshots", run_args.snapshots, "write VTK snapshots");

  CLI::App* cmp = app.add_subcommand(
      "compare", "run all methods on the reference run's timesteps");
  add_source_options(cmp, cmp_args);
  std::vector<std::string> cmp_methods;
  cmp->add_option("--methods", cmp_methods,
                  "subset of methods (default: all five)")
      ->delimiter(',');
  cmp->add_option("--out", cmp_args.out_dir, "output directory");
  cmp->add_option("--workers", cmp_args.workers, "OpenMP thread count");
  cmp->add_flag("--snapshots", cmp_args.snapshots, "write VTK snapshots");

  CLI::App* gen = app.add_subcommand("gen-case", "write a built-in case deck");
  gen->add_option("--case", gen_args.case_name, "case name")->required();
  gen->add_option("--seed", gen_args.seed, "permeability field seed")
      ->each([&gen_args](const std::string&) { gen_args.have_seed = true; });
  std::string gen_out = "-";
  gen->add_option("--deck-out", gen_out, "output file ('-' = stdout)");

  CLI::App* echo = app.add_subcommand("echo", "parse a deck and print it back");
  echo->add_option("--deck", echo_args.deck_path, "deck file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const addm::Deck deck = load_deck(run_args);
      const addm::RunResult res = run_deck(deck, make_options(run_args));
      std::cout << addm::report_csv(res.rows);
      std::cout << "\n" << addm::run_summary({res});
      return 0;
    }
    if (cmp->parsed()) {
      const addm::Deck deck = load_deck(cmp_args);
      std::vector<addm::Method> methods;
      for (const std::string& m : cmp_methods)
        methods.push_back(addm::method_from_string(m));
      const addm::CompareResult res =
          run_compare(deck, make_options(cmp_args), methods);
      std::cout << res.summary;
      return 0;
    }
    if (gen->parsed()) {
      const addm::Deck deck = addm::builtin_case(
          gen_args.case_name, gen_args.have_seed ? gen_args.seed : 12345ull);
      const std::string text = addm::echo_deck(deck);
      if (gen_out == "-") {
        std::cout << text;
      } else {
        FILE* f = std::fopen(gen_out.c_str(), "wb");
        if (!f) throw addm::ConfigError("cannot write '" + gen_out + "'");
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
      }
      return 0;
    }
    if (echo->parsed()) {
      std::cout << addm::echo_deck(addm::parse_deck_file(echo_args.deck_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
