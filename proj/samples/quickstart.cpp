// Minimal end-to-end use of the library: simulate a rounded export pair,
// analyze it and print the co-morbid terms.

#include <cstdio>

#include "comorbid/comorbid.hpp"

int main() {
  comorbid::SynthConfig synth;
  synth.base_name = "Clinic";
  synth.condition_name = "ClinicCondition";
  synth.n_base = 200000;
  synth.n_condition = 2000;
  synth.seed = 7;
  for (int i = 0; i < 40; ++i) {
    synth.terms.push_back({"N" + std::to_string(i), "null term", 0.01, 1.0, 3.0});
  }
  synth.terms.push_back({"HIGH", "planted OR 20", 0.01, 20.0, 3.0});
  synth.terms.push_back({"MOD", "planted OR 4", 0.01, 4.0, 3.0});

  const auto population = comorbid::simulate_population(synth);
  const comorbid::AnalysisConfig cfg;
  const auto analysis = comorbid::analyze_population(population.pair, cfg);

  std::printf("%zu valid terms, estimated bias %.2f\n", analysis.m_valid, analysis.bias->geometric_mean);
  for (const auto& t : analysis.terms) {
    if (t.level == comorbid::ComorbidityLevel::NotSignificant) continue;
    std::printf("%-6s OR %.2f  Q %.2f  adjusted %.2f  [%.2f, %.2f]  %s\n", t.term_id.c_str(), t.raw_or(),
                t.fcr->q_max, t.raw_or() / cfg.mu, t.fcr->interval.lower / cfg.mu, t.fcr->interval.upper / cfg.mu,
                std::string(comorbid::to_string(t.level)).c_str());
  }
}
