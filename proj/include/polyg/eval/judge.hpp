#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/llm/gateway.hpp"

namespace polyg::eval {

// The five judged criteria, in report order.
extern const std::vector<std::string> kCriteria;

// A head-to-head judging request. Candidate answers are shuffled with the
// seeded generator and presented under anonymous letter labels so the
// judge cannot key on position or system identity.
struct JudgeRequest {
    std::string question;
    // Presentation order: label ("A", "B", ...) -> index into the caller's
    // answer list.
    std::vector<std::pair<std::string, std::size_t>> labels;
    std::vector<std::string> criteria;
    std::vector<llm::Message> messages;
};

// Needs at least two answers. The prompt instructs one line per criterion
// and explicitly permits multiple winners per criterion.
Result<JudgeRequest> build_judge_request(const std::string& question,
                                         const std::vector<std::string>& answers,
                                         std::uint64_t seed);

// Parses "<criterion>: <labels>" lines back to answer indices via the
// request's label table. Criteria missing from the reply map to empty
// winner lists; unknown labels are ignored.
std::map<std::string, std::vector<std::size_t>> parse_judge_verdict(
    const std::string& reply, const JudgeRequest& request);

}  // namespace polyg::eval
