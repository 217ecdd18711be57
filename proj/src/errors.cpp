#include "ghostflow/errors.hpp"

#include <sstream>

namespace ghostflow {

namespace {

std::string join_issues(const std::string& context, const std::vector<std::string>& issues) {
    std::ostringstream os;
    os << context << ": " << issues.size() << " invariant violation(s)";
    for (const auto& s : issues) os << "\n  - " << s;
    return os.str();
}

std::string describe_evidence(const std::map<std::string, double>& evidence) {
    std::ostringstream os;
    os << "classify_regime: no branch fired; evidence:";
    for (const auto& [k, v] : evidence) os << " " << k << "=" << v;
    return os.str();
}

}  // namespace

ScenarioError::ScenarioError(const std::string& context, std::vector<std::string> issues_in)
    : Error(join_issues(context, issues_in)), issues(std::move(issues_in)) {}

InconclusiveRegimeError::InconclusiveRegimeError(std::map<std::string, double> evidence_in)
    : Error(describe_evidence(evidence_in)), evidence(std::move(evidence_in)) {}

}  // namespace ghostflow
