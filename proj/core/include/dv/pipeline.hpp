#pragma once

#include <memory>

#include "dv/decomposer.hpp"
#include "dv/gateway.hpp"
#include "dv/judge.hpp"
#include "dv/model.hpp"
#include "dv/prompts.hpp"
#include "dv/taxonomy.hpp"
#include "dv/verifier.hpp"

namespace dv {

// Anything that can turn (task, answer, trajectory) into a verification
// bundle. The reflection loop depends on this interface only.
class Verifier {
public:
    virtual ~Verifier() = default;
    virtual VerificationBundle verify(const Task& task, const std::string& answer,
                                      const Trajectory& trajectory) = 0;
};

// The full pipeline: summarize -> identify -> follow-ups -> research ->
// judge -> (feedback on reject) -> bundle. Stateless between calls; safe to
// share across task workers.
class VerifierPipeline : public Verifier {
public:
    VerifierPipeline(std::shared_ptr<Gateway> gateway, PromptLibrary prompts,
                     FailureTaxonomy taxonomy, std::shared_ptr<ResearchAgent> research,
                     DecomposerOptions options = {});

    VerificationBundle verify(const Task& task, const std::string& answer,
                              const Trajectory& trajectory) override;

private:
    std::shared_ptr<Gateway> gateway_;
    PromptLibrary prompts_;
    FailureTaxonomy taxonomy_;
    std::shared_ptr<ResearchAgent> research_;
    DecomposerOptions options_;
};

// Forced-reject bundle recorded when the solving agent fails for a round. It
// carries the canned "retry the task" feedback so feedback threading stays
// exact.
VerificationBundle make_synthetic_reject_bundle(const Task& task, const std::string& answer);

}  // namespace dv
