#pragma once

#include "helpers.hpp"
#include "prefopt/session.hpp"

namespace testing {

// Two mock backends over the bundled fixtures plus the offline provider.
inline prefopt::SessionDeps MockDeps(std::vector<std::string> names = {"llm-1", "llm-2"}) {
  using namespace prefopt;
  auto store = std::make_shared<const FixtureStore>(FixtureStore::LoadDirectory(DataDir() / "fixtures"));
  SessionDeps deps;
  for (auto& n : names) deps.backends.push_back(std::make_shared<MockBackend>(n, store));
  ProviderConfig pc;
  pc.gazetteer = DataDir() / "gazetteer.json";
  deps.provider = MakeProvider(pc);
  return deps;
}

inline const std::vector<std::string>& BerlinSix() {
  static const std::vector<std::string> ids{"berlin-hauptbahnhof", "brandenburg-gate",  "checkpoint-charlie",
                                            "east-side-gallery",   "museum-island",     "berlin-wall-memorial"};
  return ids;
}

inline constexpr const char* kBerlinPreference = "Cold War history in Berlin";
inline constexpr const char* kRefinePreference = "Cold War history, but shorter visits please";

}  // namespace testing
