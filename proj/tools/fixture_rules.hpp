#pragma once

// Deterministic rule-based stand-in for the agent controller and the target
// model, used to author the 40-meme mock fixture. It answers from the call
// slot (`<meme or sample id>/<call>`), never from free text, so the recorded
// scenario only changes when prompts or call sites change.

#include "memeprobe/config.hpp"
#include "memeprobe/domain.hpp"
#include "memeprobe/gateway.hpp"

#include <string>
#include <vector>

namespace memeprobe::fixture {

inline constexpr int kMemeCount = 40;

/// The fixture manifest: ids m01..m40, 4 harm categories plus 2 harmless memes.
std::vector<MemeRecord> manifest();

/// Score the rule target earns on the original version of meme `n` (1-based).
int base_score(int n);

/// Whether a refined rewrite of meme `n` lowers its score by one.
bool refinement_drops(int n);

class RuleBackend : public ModelBackend {
public:
    ModelResponse complete(const ModelRequest& request) override;
    BackendKind kind() const override { return BackendKind::mock; }
};

/// The run configuration shipped with the fixture (paths relative to it).
std::string config_json();

} // namespace memeprobe::fixture
