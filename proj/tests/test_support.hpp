#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ontoweak/ontology.hpp"
#include "ontoweak/random.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return ONTOWEAK_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ontoweak_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Valid two-level ontology with 1..max_super superclasses of 1..max_children children.
inline ontoweak::Ontology random_ontology(ontoweak::Rng& rng, std::size_t max_super = 7,
                                          std::size_t max_children = 6) {
  const std::size_t n_super = 1 + ontoweak::uniform_index(rng, max_super);
  std::vector<ontoweak::Label> supers;
  std::vector<ontoweak::Label> subs;
  std::vector<std::size_t> parent;
  for (std::size_t j = 0; j < n_super; ++j) {
    supers.push_back({"S" + std::to_string(j), "super " + std::to_string(j)});
    const std::size_t kids = 1 + ontoweak::uniform_index(rng, max_children);
    for (std::size_t k = 0; k < kids; ++k) {
      const std::string id = "S" + std::to_string(j) + "." + std::to_string(k);
      subs.push_back({id, "sub " + id});
      parent.push_back(j);
    }
  }
  return ontoweak::Ontology::from_parents(std::move(supers), std::move(subs), std::move(parent));
}

/// Random nonempty subclass sets of size 1..3.
inline std::vector<std::vector<std::size_t>> random_sub_sets(ontoweak::Rng& rng, std::size_t n,
                                                             std::size_t num_sub) {
  std::vector<std::vector<std::size_t>> sets(n);
  for (auto& s : sets) {
    const std::size_t k = 1 + ontoweak::uniform_index(rng, std::min<std::size_t>(3, num_sub));
    while (s.size() < k) {
      const std::size_t v = ontoweak::uniform_index(rng, num_sub);
      if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
    }
    std::sort(s.begin(), s.end());
  }
  return sets;
}

}  // namespace testing_support
