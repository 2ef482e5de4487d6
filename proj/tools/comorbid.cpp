// comorbid: co-morbidity mining over rounded cohort exports.
//
//   comorbid analyze  --base Z.csv --condition ZC.csv --out DIR
//   comorbid diff     --senior-base ... --senior-condition ... --bg-base ... --bg-condition ... --out DIR
//   comorbid simulate [--config study.json] --out DIR
//
// Exit codes: 0 ok, 1 input/parse error, 2 configuration error, 3 infeasible.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comorbid/comorbid.hpp"

namespace {

enum ExitCode { kOk = 0, kParse = 1, kConfig = 2, kInfeasible = 3 };

struct Options {
  comorbid::AnalysisConfig cfg;
  std::string out = ".";
  std::vector<double> thresholds{3.0, 5.0, 10.0};
  std::optional<std::int64_t> width;
  bool strict = true;
};

void add_analysis_options(CLI::App& cmd, Options& o) {
  auto& c = o.cfg;
  cmd.add_option("--alpha", c.alpha, "Significance level for BH/FCR")->envname("COMORBID_ALPHA")->capture_default_str();
  cmd.add_option("--mu", c.mu, "Selection-bias null odds ratio")->envname("COMORBID_MU")->capture_default_str();
  cmd.add_option("--samples", c.imputation.samples, "Imputation samples per term")
      ->envname("COMORBID_SAMPLES")
      ->capture_default_str();
  cmd.add_option("--seed", c.imputation.seed, "Random seed")->envname("COMORBID_SEED")->capture_default_str();
  cmd.add_option("--width", o.width, "Censoring half-width (default: as declared by the exports)")
      ->envname("COMORBID_WIDTH");
  cmd.add_option("--grid-lo", c.grid.lo, "Smallest null level, log2 OR")->envname("COMORBID_GRID_LO")->capture_default_str();
  cmd.add_option("--grid-hi", c.grid.hi, "Largest null level, log2 OR")->envname("COMORBID_GRID_HI")->capture_default_str();
  cmd.add_option("--grid-step", c.grid.step, "Null grid spacing, log2 units")
      ->envname("COMORBID_GRID_STEP")
      ->capture_default_str();
  cmd.add_option("--diff-range", c.diff_half_range, "Differential grid half-range, log2 ratio")
      ->envname("COMORBID_DIFF_RANGE")
      ->capture_default_str();
  cmd.add_option("--thresholds", o.thresholds, "Minor,Moderate,High null OR levels")
      ->delimiter(',')
      ->expected(3)
      ->envname("COMORBID_THRESHOLDS");
  cmd.add_option("--out", o.out, "Output directory")->envname("COMORBID_OUT")->capture_default_str();
  cmd.add_option("--strict", o.strict, "Reject counts that are not multiples of ten")
      ->envname("COMORBID_STRICT")
      ->capture_default_str();
}

void finalize(Options& o) {
  o.cfg.imputation.width = o.width;
  o.cfg.thresholds = {o.thresholds[0], o.thresholds[1], o.thresholds[2]};
  o.cfg.format.strict = o.strict;
  o.cfg.validate();
}

int run(int argc, char** argv) {
  CLI::App app{"Co-morbidity mining over privacy-rounded cohort exports"};
  app.require_subcommand(1);

  Options analyze_opts;
  std::string base, condition;
  auto* analyze = app.add_subcommand("analyze", "Score terms against the condition in one population");
  analyze->add_option("--base", base, "Population export")->required();
  analyze->add_option("--condition", condition, "Condition subpopulation export")->required();
  add_analysis_options(*analyze, analyze_opts);

  Options diff_opts;
  comorbid::DiffInputs diff_in;
  auto* diff = app.add_subcommand("diff", "Differential co-morbidity between two populations");
  diff->add_option("--senior-base", diff_in.senior_base)->required();
  diff->add_option("--senior-condition", diff_in.senior_condition)->required();
  diff->add_option("--bg-base", diff_in.bg_base)->required();
  diff->add_option("--bg-condition", diff_in.bg_condition)->required();
  add_analysis_options(*diff, diff_opts);

  std::string study_path, sim_out = ".";
  std::optional<std::int64_t> sim_width;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Write synthetic exports with planted effects");
  simulate->add_option("--config", study_path, "Study JSON (default: built-in study)");
  simulate->add_option("--width", sim_width, "Rounding half-width, 0 or 5")->envname("COMORBID_WIDTH");
  simulate->add_option("--seed", sim_seed, "Override the study seed")->envname("COMORBID_SEED");
  simulate->add_option("--out", sim_out, "Output directory")->envname("COMORBID_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const comorbid::WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

  try {
    if (*analyze) {
      finalize(analyze_opts);
      const auto pa = comorbid::run_analyze(base, condition, analyze_opts.cfg, analyze_opts.out, sink);
      const auto s = comorbid::summarize(pa);
      std::cerr << pa.name << ": " << s.terms << " terms, " << s.valid << " valid, " << s.selected << " selected\n";
    } else if (*diff) {
      finalize(diff_opts);
      const auto da = comorbid::run_diff(diff_in, diff_opts.cfg, diff_opts.out, sink);
      std::size_t confident = 0;
      for (const auto& r : da.rows) confident += r.result.confident ? 1 : 0;
      std::cerr << da.rows.size() << " comparable terms, " << confident << " differentially co-morbid\n";
    } else if (*simulate) {
      comorbid::StudyConfig study =
          study_path.empty() ? comorbid::default_study_config() : comorbid::read_study_file(study_path);
      for (auto& pop : study.populations) {
        if (sim_width) pop.config.rounding_width = *sim_width;
        if (sim_seed) pop.config.seed = *sim_seed;
      }
      comorbid::run_simulate(study, sim_out);
    }
  } catch (const comorbid::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const comorbid::InfeasibleEffectError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const comorbid::CensoringInfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const comorbid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
