#pragma once

// Two-population synthetic study description (JSON):
//
// {
//   "seed": 2019, "rounding_width": 5, "stochastic": false,
//   "populations": [
//     {"name": "senior", "base_name": "Senior", "condition_name": "SeniorIPV",
//      "n_base": 400000, "n_condition": 4000},
//     {"name": "bg", ...}
//   ],
//   "terms": [
//     {"term_id": "T001", "description": "...", "base_rate": 0.01,
//      "planted_or": 1, "planted_bias": 3,
//      "overrides": {"bg": {"planted_or": 2}}}
//   ]
// }
//
// Term fields apply to every population unless overridden by name.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "comorbid/errors.hpp"
#include "comorbid/synth.hpp"

namespace comorbid {

struct StudyPopulation {
  std::string name;  // file prefix, e.g. "senior"
  SynthConfig config;
};

struct StudyConfig {
  std::vector<StudyPopulation> populations;

  void validate() const {
    if (populations.empty()) throw ConfigError("study needs at least one population");
    for (const auto& p : populations) {
      if (p.name.empty()) throw ConfigError("population with empty name");
      p.config.validate();
    }
  }
};

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline StudyConfig study_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("study config must be a JSON object");
  const auto seed = detail::json_get<std::uint64_t>(j, "seed", 0);
  const auto width = detail::json_get<std::int64_t>(j, "rounding_width", 5);
  const auto stochastic = detail::json_get<bool>(j, "stochastic", false);
  if (!j.contains("populations") || !j["populations"].is_array()) throw ConfigError("missing 'populations' array");
  if (!j.contains("terms") || !j["terms"].is_array()) throw ConfigError("missing 'terms' array");

  StudyConfig study;
  for (const auto& pj : j["populations"]) {
    StudyPopulation pop;
    pop.name = detail::json_get<std::string>(pj, "name", "");
    SynthConfig& c = pop.config;
    c.base_name = detail::json_get<std::string>(pj, "base_name", pop.name);
    c.condition_name = detail::json_get<std::string>(pj, "condition_name", pop.name + "_condition");
    c.n_base = detail::json_get<std::int64_t>(pj, "n_base", 0);
    c.n_condition = detail::json_get<std::int64_t>(pj, "n_condition", 0);
    c.rounding_width = width;
    c.seed = seed;
    c.stochastic = stochastic;
    for (const auto& tj : j["terms"]) {
      SynthTerm t;
      t.term_id = detail::json_get<std::string>(tj, "term_id", "");
      t.description = detail::json_get<std::string>(tj, "description", t.term_id);
      t.base_rate = detail::json_get<double>(tj, "base_rate", 0.01);
      t.planted_or = detail::json_get<double>(tj, "planted_or", 1.0);
      t.planted_bias = detail::json_get<double>(tj, "planted_bias", 1.0);
      if (tj.contains("overrides") && tj["overrides"].contains(pop.name)) {
        const auto& oj = tj["overrides"][pop.name];
        t.base_rate = detail::json_get<double>(oj, "base_rate", t.base_rate);
        t.planted_or = detail::json_get<double>(oj, "planted_or", t.planted_or);
        t.planted_bias = detail::json_get<double>(oj, "planted_bias", t.planted_bias);
      }
      c.terms.push_back(std::move(t));
    }
    study.populations.push_back(std::move(pop));
  }
  study.validate();
  return study;
}

inline StudyConfig read_study_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("study config '" + path.string() + "': " + e.what());
  }
  return study_from_json(j);
}

// Senior vs background study: mostly null terms carrying a uniform bias of 3,
// a few planted co-morbid terms, one term differentially co-morbid in the
// senior population, and one term absent from the condition cohorts.
inline StudyConfig default_study_config() {
  nlohmann::json terms = nlohmann::json::array();
  for (int i = 1; i <= 100; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "T%03d", i);
    terms.push_back({{"term_id", id},
                     {"description", std::string("Null term ") + id},
                     {"base_rate", 0.005 + 0.0005 * (i % 60)},
                     {"planted_or", 1.0},
                     {"planted_bias", 3.0}});
  }
  terms.push_back({{"term_id", "T101"}, {"description", "Planted high co-morbidity"}, {"base_rate", 0.01},
                   {"planted_or", 10.0}, {"planted_bias", 3.0}});
  terms.push_back({{"term_id", "T102"}, {"description", "Planted moderate co-morbidity"}, {"base_rate", 0.01},
                   {"planted_or", 2.5}, {"planted_bias", 3.0}});
  terms.push_back({{"term_id", "T103"}, {"description", "Planted differential co-morbidity"},
                   {"base_rate", 0.01}, {"planted_or", 10.0}, {"planted_bias", 3.0},
                   {"overrides", {{"bg", {{"planted_or", 2.0}}}}}});
  terms.push_back({{"term_id", "T104"}, {"description", "Rare term"}, {"base_rate", 0.00002},
                   {"planted_or", 1.0}, {"planted_bias", 1.0}});
  const nlohmann::json j = {
      {"seed", 2019},
      {"rounding_width", 5},
      {"stochastic", false},
      {"populations",
       {{{"name", "senior"}, {"base_name", "Senior"}, {"condition_name", "SeniorIPV"}, {"n_base", 400000},
         {"n_condition", 4000}},
        {{"name", "bg"}, {"base_name", "BG"}, {"condition_name", "IPV"}, {"n_base", 1000000},
         {"n_condition", 10000}}}},
      {"terms", terms}};
  return study_from_json(j);
}

}  // namespace comorbid
