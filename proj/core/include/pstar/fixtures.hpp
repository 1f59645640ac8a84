#pragma once

#include <string_view>

// Reference texts used by the prompt builder and as the default few-shot
// exemplar: the domain definition, the instruction lines, and the solved
// four-block example problem with its optimal plan.
namespace pstar::fixtures {

extern const std::string_view kDomainText;
extern const std::string_view kInstructionAfterDomain;
extern const std::string_view kInstructionExemplar;
extern const std::string_view kInstructionFinal;
extern const std::string_view kExemplarProblemText;
extern const std::string_view kExemplarPlanText;

}  // namespace pstar::fixtures
